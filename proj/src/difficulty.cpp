#include "mhts/difficulty.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "mhts/errors.hpp"
#include "mhts/log.hpp"
#include "mhts/text.hpp"

namespace mhts {

std::optional<EvidenceType> parse_evidence_type(const std::string& raw) {
    auto cat = parse_category(raw);
    if (!cat) return std::nullopt;
    switch (*cat) {
        case ReasoningCategory::one_hop: return EvidenceType::one_hop;
        case ReasoningCategory::conjunction: return EvidenceType::conjunction;
        case ReasoningCategory::existence: return EvidenceType::existence;
        case ReasoningCategory::negation: return EvidenceType::negation;
        case ReasoningCategory::multi_hop: return std::nullopt;  // excluded by definition
    }
    return std::nullopt;
}

std::string to_string(EvidenceType t) {
    switch (t) {
        case EvidenceType::one_hop: return "one_hop";
        case EvidenceType::conjunction: return "conjunction";
        case EvidenceType::existence: return "existence";
        case EvidenceType::negation: return "negation";
    }
    return "?";
}

std::string to_string(SupportStatus s) {
    switch (s) {
        case SupportStatus::unset: return "unset";
        case SupportStatus::supported: return "supported";
        case SupportStatus::implicit_supposition: return "implicit_supposition";
        case SupportStatus::hallucination: return "hallucination";
    }
    return "?";
}

namespace {

SupportStatus support_status_from_string(const std::string& s) {
    if (s == "supported") return SupportStatus::supported;
    if (s == "implicit_supposition") return SupportStatus::implicit_supposition;
    if (s == "hallucination") return SupportStatus::hallucination;
    return SupportStatus::unset;
}

std::optional<std::vector<Evidence>> parse_decomposition(const std::string& response) {
    auto arr = extract_first_json_array(response);
    if (!arr) return std::nullopt;
    std::vector<Evidence> out;
    for (const nlohmann::json& item : *arr) {
        if (!item.is_object() || !item.contains("text") || !item.contains("type") ||
            !item.at("text").is_string() || !item.at("type").is_string()) {
            return std::nullopt;  // structurally broken: let the repair retry handle it
        }
        std::string text = trim(item.at("text").get<std::string>());
        auto etype = parse_evidence_type(item.at("type").get<std::string>());
        if (text.empty() || !etype) return std::nullopt;
        Evidence e;
        e.text = text;
        e.etype = *etype;
        e.position = static_cast<int>(out.size());
        out.push_back(std::move(e));
    }
    if (out.empty()) return std::nullopt;
    return out;
}

}  // namespace

std::vector<Evidence> decompose_claim(Gateway& gateway, const Claim& claim, double temperature) {
    if (claim.level < 1) throw UsageError("decompose_claim expects a multi-hop claim");

    ChatRequest req;
    req.prompt_template_id = "evidence_decompose";
    req.variables = {{"claim", claim.text}};
    req.temperature = temperature;
    std::string response = gateway.chat(req);
    if (auto parsed = parse_decomposition(response)) {
        auto evidences = *parsed;
        for (size_t i = 0; i < evidences.size(); ++i) {
            evidences[i].id = claim.id + "_e" + std::to_string(i);
        }
        return evidences;
    }

    log_warn("decomposition of claim " + claim.id + " invalid; retrying with repair prompt");
    ChatRequest repair;
    repair.prompt_template_id = "evidence_decompose_repair";
    repair.variables = {{"claim", claim.text}, {"raw", response}};
    repair.temperature = temperature;
    std::string repaired = gateway.chat(repair);
    if (auto parsed = parse_decomposition(repaired)) {
        auto evidences = *parsed;
        for (size_t i = 0; i < evidences.size(); ++i) {
            evidences[i].id = claim.id + "_e" + std::to_string(i);
        }
        return evidences;
    }
    throw StageError("decomposition of claim " + claim.id + " failed after repair retry");
}

std::vector<int> map_evidence(Gateway& gateway, const Evidence& evidence,
                              const std::vector<Chunk>& candidate_chunks, double temperature) {
    std::vector<int> supporting;
    for (const Chunk& chunk : candidate_chunks) {
        ChatRequest req;
        req.prompt_template_id = "entailment_check";
        req.variables = {{"evidence", evidence.text}, {"chunk", chunk.text}};
        req.temperature = temperature;
        std::string verdict = first_word_lower(gateway.chat(req));
        if (verdict == "yes") {
            supporting.push_back(chunk.index);
        } else if (verdict != "no") {
            log_warn("entailment response neither yes nor no ('" + verdict +
                     "'); treated as not entailed");
        }
    }
    return supporting;
}

void classify_support(std::vector<Evidence>& evidences, bool adjacent_only) {
    const size_t n = evidences.size();
    std::vector<bool> mapped(n);
    for (size_t i = 0; i < n; ++i) mapped[i] = !evidences[i].supporting_chunks.empty();

    for (size_t i = 0; i < n; ++i) {
        if (mapped[i]) {
            evidences[i].status = SupportStatus::supported;
            continue;
        }
        bool before, after;
        if (adjacent_only) {
            before = i > 0 && mapped[i - 1];
            after = i + 1 < n && mapped[i + 1];
        } else {
            before = false;
            for (size_t j = 0; j < i; ++j) before = before || mapped[j];
            after = false;
            for (size_t j = i + 1; j < n; ++j) after = after || mapped[j];
        }
        evidences[i].status = (before && after) ? SupportStatus::implicit_supposition
                                                : SupportStatus::hallucination;
    }
}

SimilarityResult compute_similarity(std::span<const double> question_embedding,
                                    const std::vector<Evidence>& evidences,
                                    const std::vector<Vec>& chunk_embeddings) {
    SimilarityResult result;
    result.per_evidence.assign(evidences.size(), 0.0);
    double total = 0.0;
    size_t supported = 0;
    for (size_t i = 0; i < evidences.size(); ++i) {
        const Evidence& e = evidences[i];
        if (e.status == SupportStatus::unset) {
            throw UsageError("compute_similarity: evidence statuses not classified");
        }
        if (e.status != SupportStatus::supported) continue;
        double acc = 0.0;
        for (int chunk_index : e.supporting_chunks) {
            size_t idx = static_cast<size_t>(chunk_index);
            if (idx >= chunk_embeddings.size()) {
                throw UsageError("compute_similarity: unknown chunk " +
                                 std::to_string(chunk_index));
            }
            acc += cosine_similarity(question_embedding, chunk_embeddings[idx]);
        }
        double mean = acc / static_cast<double>(e.supporting_chunks.size());
        result.per_evidence[i] = mean;
        total += mean;
        ++supported;
    }
    if (supported == 0) {
        result.no_support = true;
        result.mean_similarity = 0.0;
    } else {
        result.mean_similarity = total / static_cast<double>(supported);
    }
    return result;
}

int hop_count(const std::vector<Evidence>& evidences) {
    int h = 0;
    for (const Evidence& e : evidences) {
        if (e.status == SupportStatus::supported ||
            e.status == SupportStatus::implicit_supposition) {
            ++h;
        }
    }
    return h;
}

double difficulty_score(int h, double s, double lambda) {
    if (h < 0) throw UsageError("difficulty_score: h must be >= 0");
    return static_cast<double>(h) - lambda * s;
}

nlohmann::json difficulty_report_to_json(const DifficultyReport& r) {
    nlohmann::json evidences = nlohmann::json::array();
    for (const Evidence& e : r.evidences) {
        evidences.push_back({{"id", e.id},
                             {"text", e.text},
                             {"etype", to_string(e.etype)},
                             {"position", e.position},
                             {"status", to_string(e.status)},
                             {"supporting_chunks", e.supporting_chunks},
                             {"similarity", e.similarity}});
    }
    nlohmann::json flags = nlohmann::json::array();
    if (r.no_support) flags.push_back("no_support");
    return nlohmann::json{{"qa_id", r.qa_id}, {"h", r.hop_count},   {"s", r.similarity},
                          {"lambda", r.lambda}, {"D", r.difficulty}, {"evidences", evidences},
                          {"flags", flags}};
}

DifficultyReport difficulty_report_from_json(const nlohmann::json& j) {
    DifficultyReport r;
    r.qa_id = j.at("qa_id").get<std::string>();
    r.hop_count = j.at("h").get<int>();
    r.similarity = j.at("s").get<double>();
    r.lambda = j.at("lambda").get<double>();
    r.difficulty = j.at("D").get<double>();
    for (const nlohmann::json& ej : j.at("evidences")) {
        Evidence e;
        e.id = ej.at("id").get<std::string>();
        e.text = ej.at("text").get<std::string>();
        auto etype = parse_evidence_type(ej.at("etype").get<std::string>());
        if (!etype) throw Error("evidence " + e.id + " carries unknown type");
        e.etype = *etype;
        e.position = ej.at("position").get<int>();
        e.status = support_status_from_string(ej.at("status").get<std::string>());
        e.supporting_chunks = ej.at("supporting_chunks").get<std::vector<int>>();
        e.similarity = ej.at("similarity").get<double>();
        r.evidences.push_back(std::move(e));
    }
    for (const nlohmann::json& f : j.at("flags")) {
        if (f.get<std::string>() == "no_support") r.no_support = true;
    }
    return r;
}

std::vector<std::vector<std::string>> bucket_by_difficulty(
    const std::vector<DifficultyReport>& reports, int n_buckets, int samples_per_bucket,
    uint64_t seed) {
    if (n_buckets < 2) throw UsageError("bucket_by_difficulty: need at least 2 buckets");
    if (reports.size() < static_cast<size_t>(n_buckets)) {
        throw UsageError("bucket_by_difficulty: fewer reports than buckets");
    }
    if (samples_per_bucket < 1) throw UsageError("bucket_by_difficulty: need samples_per_bucket >= 1");

    std::vector<const DifficultyReport*> sorted;
    sorted.reserve(reports.size());
    for (const auto& r : reports) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](const DifficultyReport* a, const DifficultyReport* b) {
        if (a->difficulty != b->difficulty) return a->difficulty < b->difficulty;
        return a->qa_id < b->qa_id;  // boundary ties resolved lexicographically
    });

    const size_t n = sorted.size();
    std::vector<std::vector<std::string>> buckets(static_cast<size_t>(n_buckets));
    std::mt19937_64 rng(splitmix64(seed));
    for (int b = 0; b < n_buckets; ++b) {
        size_t begin = n * static_cast<size_t>(b) / static_cast<size_t>(n_buckets);
        size_t end = n * static_cast<size_t>(b + 1) / static_cast<size_t>(n_buckets);
        std::vector<std::string> ids;
        for (size_t i = begin; i < end; ++i) ids.push_back(sorted[i]->qa_id);
        if (ids.size() > static_cast<size_t>(samples_per_bucket)) {
            // partial Fisher-Yates keeps the draw platform-independent
            for (size_t i = 0; i < static_cast<size_t>(samples_per_bucket); ++i) {
                size_t j = i + static_cast<size_t>(rng() % (ids.size() - i));
                std::swap(ids[i], ids[j]);
            }
            ids.resize(static_cast<size_t>(samples_per_bucket));
            std::sort(ids.begin(), ids.end());
        } else if (ids.size() < static_cast<size_t>(samples_per_bucket)) {
            log_warn("difficulty bucket " + std::to_string(b) + " short: " +
                     std::to_string(ids.size()) + " of " + std::to_string(samples_per_bucket));
        }
        buckets[static_cast<size_t>(b)] = std::move(ids);
    }
    return buckets;
}

}  // namespace mhts

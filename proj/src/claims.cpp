#include "mhts/claims.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "mhts/errors.hpp"
#include "mhts/log.hpp"
#include "mhts/text.hpp"

namespace mhts {

std::optional<ReasoningCategory> parse_category(const std::string& raw) {
    std::string key;
    for (char c : raw) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        // hyphens, underscores, spaces all vanish
    }
    if (key == "onehop") return ReasoningCategory::one_hop;
    if (key == "conjunction") return ReasoningCategory::conjunction;
    if (key == "existence") return ReasoningCategory::existence;
    if (key == "multihop") return ReasoningCategory::multi_hop;
    if (key == "negation") return ReasoningCategory::negation;
    return std::nullopt;
}

std::string to_string(ReasoningCategory c) {
    switch (c) {
        case ReasoningCategory::one_hop: return "one_hop";
        case ReasoningCategory::conjunction: return "conjunction";
        case ReasoningCategory::existence: return "existence";
        case ReasoningCategory::multi_hop: return "multi_hop";
        case ReasoningCategory::negation: return "negation";
    }
    return "?";
}

nlohmann::json claim_to_json(const Claim& claim) {
    return nlohmann::json{{"id", claim.id},
                          {"text", claim.text},
                          {"category", to_string(claim.category)},
                          {"source_chunks", claim.source_chunks},
                          {"level", claim.level},
                          {"parents", claim.parents}};
}

Claim claim_from_json(const nlohmann::json& j) {
    Claim c;
    c.id = j.at("id").get<std::string>();
    c.text = j.at("text").get<std::string>();
    auto cat = parse_category(j.at("category").get<std::string>());
    if (!cat) throw Error("claim " + c.id + " carries unknown category");
    c.category = *cat;
    c.source_chunks = j.at("source_chunks").get<std::vector<int>>();
    c.level = j.at("level").get<int>();
    if (j.contains("parents")) c.parents = j.at("parents").get<std::vector<std::string>>();
    return c;
}

std::optional<nlohmann::json> extract_first_json_array(const std::string& text) {
    for (size_t start = 0; start < text.size(); ++start) {
        if (text[start] != '[') continue;
        // scan for the matching bracket, honoring strings and escapes
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '[' || c == '{') {
                ++depth;
            } else if (c == ']' || c == '}') {
                --depth;
                if (depth == 0) {
                    nlohmann::json candidate =
                        nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
                    if (!candidate.is_discarded() && candidate.is_array()) return candidate;
                    break;  // balanced but malformed; try the next '['
                }
            }
        }
    }
    return std::nullopt;
}

namespace {

nlohmann::json parse_claim_array_or_repair(Gateway& gateway, const Chunk& chunk,
                                           const ClaimsOptions& options) {
    ChatRequest req;
    req.prompt_template_id = "claim_extract";
    req.variables = {{"chunk_text", chunk.text},
                     {"max_claims", std::to_string(options.max_claims_per_chunk)}};
    req.temperature = options.temperature;
    req.max_output_tokens = options.max_output_tokens;
    std::string response = gateway.chat(req);

    if (auto arr = extract_first_json_array(response)) return *arr;

    log_warn("chunk " + std::to_string(chunk.index) +
             ": unparseable extraction response, retrying with repair prompt");
    ChatRequest repair;
    repair.prompt_template_id = "claim_extract_repair";
    repair.variables = {{"raw", response}};
    repair.temperature = options.temperature;
    repair.max_output_tokens = options.max_output_tokens;
    std::string repaired = gateway.chat(repair);
    if (auto arr = extract_first_json_array(repaired)) return *arr;
    throw StageError("claim extraction for chunk " + std::to_string(chunk.index) +
                     " produced no parseable JSON array after repair retry");
}

}  // namespace

std::vector<Claim> extract_claims(Gateway& gateway, const Chunk& chunk,
                                  const ClaimsOptions& options) {
    if (trim(chunk.text).empty()) throw UsageError("extract_claims: empty chunk text");

    nlohmann::json arr = parse_claim_array_or_repair(gateway, chunk, options);

    std::vector<Claim> out;
    int seq = 0;
    for (const nlohmann::json& item : arr) {
        if (static_cast<int>(out.size()) >= options.max_claims_per_chunk) break;
        if (!item.is_object() || !item.contains("text") || !item.contains("category") ||
            !item.at("text").is_string() || !item.at("category").is_string()) {
            log_warn("chunk " + std::to_string(chunk.index) + ": dropping malformed claim item");
            continue;
        }
        std::string text = trim(item.at("text").get<std::string>());
        auto category = parse_category(item.at("category").get<std::string>());
        if (text.empty() || !category) {
            log_warn("chunk " + std::to_string(chunk.index) +
                     ": dropping claim with empty text or unknown category");
            continue;
        }
        Claim c;
        c.id = "c" + std::to_string(chunk.index) + "_" + std::to_string(seq++);
        c.text = text;
        c.category = *category;
        c.source_chunks = {chunk.index};
        c.level = 0;
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

const std::set<std::string>& leading_pronouns() {
    static const std::set<std::string> kPronouns{
        "he",   "she",  "it",    "they", "him",  "her",   "them", "his", "hers",
        "its",  "their", "theirs", "this", "that", "these", "those", "i",  "we",
        "you",  "me",   "us"};
    return kPronouns;
}

}  // namespace

ClaimValidationReport validate_claim(const Claim& claim, const Chunk& chunk) {
    if (claim.level != 0) throw UsageError("validate_claim expects a level-0 claim");
    ClaimValidationReport report;
    if (trim(claim.text).empty()) {
        report.flags.push_back("empty_text");
    } else if (leading_pronouns().count(first_word_lower(claim.text))) {
        report.flags.push_back("leading_unresolved_pronoun");
    }
    if (claim.source_chunks.size() != 1 || claim.source_chunks[0] != chunk.index) {
        report.flags.push_back("provenance_mismatch");
    }
    return report;
}

}  // namespace mhts

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mhts/errors.hpp"
#include "mhts/providers.hpp"
#include "mhts/text.hpp"

namespace mhts {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// HashEmbedProvider

HashEmbedProvider::HashEmbedProvider(int dim) : dim_(dim) {
    if (dim < 2) throw UsageError("hash embedder dimension must be >= 2");
}

std::string HashEmbedProvider::name() const { return "hash:" + std::to_string(dim_); }

namespace {

// High-frequency function words carry no topical signal; hashing them in
// drags every sentence toward the same blob.
bool is_stopword(const std::string& w) {
    static const std::set<std::string> kStop{
        "the", "a",  "an",  "and", "or",  "of",  "to",   "in",   "on",   "at",  "by",
        "for", "as", "was", "is",  "are", "were", "be",  "been", "that", "this", "it",
        "i",   "he", "she", "his", "her", "my",  "me",   "with", "from", "into", "had",
        "have", "has", "not", "no", "never", "but", "all", "every", "when", "after"};
    return kStop.count(w) > 0;
}

std::string strip_punct(const std::string& w) {
    std::string out;
    for (char c : w) {
        if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(c);
    }
    return out;
}

}  // namespace

Vec HashEmbedProvider::embed_one(const std::string& text) const {
    Vec v(static_cast<size_t>(dim_), 0.0);
    std::string lowered = to_lower(collapse_whitespace(text));
    auto add_feature = [&](std::string_view feature, double weight) {
        uint64_t h = fnv1a64(feature);
        size_t idx = static_cast<size_t>(h % static_cast<uint64_t>(dim_));
        double sign = ((h >> 62) & 1) ? -1.0 : 1.0;
        v[idx] += sign * weight;
    };

    for (const std::string& raw : split_words(lowered)) {
        std::string w = strip_punct(raw);
        if (w.empty() || is_stopword(w)) continue;
        add_feature(w, 1.0);
    }
    double n = norm(v);
    if (n == 0.0) {
        v[0] = 1.0;  // degenerate text still gets a unit vector
        return v;
    }
    for (double& x : v) x /= n;
    return v;
}

std::vector<Vec> HashEmbedProvider::embed(const std::vector<std::string>& texts) {
    std::vector<Vec> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

// ---------------------------------------------------------------------------
// ScriptedChatProvider
//
// Deterministic rule-based responses per template. The behaviors are chosen
// so a full pipeline run over a small corpus is meaningful: extracted claims
// are chunk sentences, multi-hop statements join source claims with a fixed
// connective that decomposition can split again, and entailment is a
// normalized containment check.

namespace {

const char* kJoiner = "; moreover, ";

std::string get_var(const std::map<std::string, std::string>& vars, const std::string& key) {
    auto it = vars.find(key);
    if (it == vars.end()) throw UsageError("scripted provider: missing variable '" + key + "'");
    return it->second;
}

int get_int_var(const std::map<std::string, std::string>& vars, const std::string& key,
                int fallback) {
    auto it = vars.find(key);
    if (it == vars.end()) return fallback;
    try {
        return std::stoi(it->second);
    } catch (...) {
        return fallback;
    }
}

bool contains_word(const std::string& lowered, const std::string& word) {
    size_t pos = 0;
    while ((pos = lowered.find(word, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !std::isalpha(static_cast<unsigned char>(lowered[pos - 1]));
        size_t end = pos + word.size();
        bool right_ok =
            end >= lowered.size() || !std::isalpha(static_cast<unsigned char>(lowered[end]));
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

std::string categorize_sentence(const std::string& sentence, bool allow_multi_hop) {
    std::string lowered = to_lower(sentence);
    if (contains_word(lowered, "not") || contains_word(lowered, "no") ||
        contains_word(lowered, "never") || contains_word(lowered, "nobody")) {
        return "negation";
    }
    if (lowered.rfind("there ", 0) == 0 || lowered.find("there was") != std::string::npos ||
        lowered.find("there is") != std::string::npos ||
        lowered.find("there were") != std::string::npos) {
        return "existence";
    }
    if (allow_multi_hop && split_words(sentence).size() > 28) return "multi-hop";
    if (contains_word(lowered, "and") || contains_word(lowered, "while") ||
        contains_word(lowered, "both")) {
        return "conjunction";
    }
    return "one_hop";
}

// "1. text\n2. text" -> texts, in order.
std::vector<std::string> parse_numbered_list(const std::string& block) {
    std::vector<std::string> out;
    std::istringstream in(block);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        size_t dot = t.find(". ");
        if (dot == std::string::npos || dot == 0) continue;
        bool numeric = true;
        for (size_t i = 0; i < dot; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) {
                numeric = false;
                break;
            }
        }
        if (!numeric) continue;
        out.push_back(trim(t.substr(dot + 2)));
    }
    return out;
}

std::string strip_terminal_period(const std::string& s) {
    std::string out = trim(s);
    while (!out.empty() && (out.back() == '.' || out.back() == '!')) out.pop_back();
    return out;
}

std::string lower_first(const std::string& s) {
    std::string out = s;
    if (!out.empty()) out[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[0])));
    return out;
}

std::string upper_first(const std::string& s) {
    std::string out = s;
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::string normalize_for_match(const std::string& s) {
    std::string lowered = to_lower(collapse_whitespace(s));
    std::string out;
    out.reserve(lowered.size());
    for (char c : lowered) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == ' ') out.push_back(c);
    }
    return collapse_whitespace(out);
}

std::string scripted_extract(const std::map<std::string, std::string>& vars) {
    std::string chunk_text = get_var(vars, "chunk_text");
    int cap = get_int_var(vars, "max_claims", 25);
    json claims = json::array();
    for (const std::string& sentence : split_sentences(chunk_text)) {
        if (static_cast<int>(claims.size()) >= cap) break;
        std::string s = collapse_whitespace(sentence);
        if (split_words(s).size() < 4) continue;  // fragments make poor claims
        claims.push_back({{"text", s}, {"category", categorize_sentence(s, true)}});
    }
    return "Here are the extracted claims:\n" + claims.dump(2) + "\n";
}

std::string scripted_multihop(const std::map<std::string, std::string>& vars) {
    std::vector<std::string> claims = parse_numbered_list(get_var(vars, "claims_numbered"));
    int cap = get_int_var(vars, "max_statements", 3);
    json out = json::array();
    // pair claim t with the one half a list away, which tends to bridge
    // different source chunks rather than restating neighbors
    size_t stride = (claims.size() + 1) / 2;
    for (size_t t = 0; t + stride < claims.size() && static_cast<int>(t) < cap; ++t) {
        size_t partner = t + stride;
        std::string combined = strip_terminal_period(claims[t]) + kJoiner +
                               lower_first(strip_terminal_period(claims[partner])) + ".";
        out.push_back({{"text", combined},
                       {"sources", {static_cast<int>(t) + 1, static_cast<int>(partner) + 1}}});
    }
    return "Combined statements follow.\n" + out.dump(2) + "\n";
}

std::string scripted_question(const std::map<std::string, std::string>& vars) {
    std::string claim = get_var(vars, "claim");
    std::vector<std::string> words = split_words(strip_terminal_period(claim));
    size_t keep = std::min<size_t>(words.size(), 14);
    std::string head;
    for (size_t i = 0; i < keep; ++i) {
        if (i) head += ' ';
        head += words[i];
    }
    return "What do the recorded events establish about the following matter: " +
           lower_first(head) + "?";
}

std::string scripted_answer(const std::map<std::string, std::string>& vars) {
    std::string claim = get_var(vars, "claim");
    std::string body = upper_first(trim(claim));
    if (!body.empty() && body.back() != '.' && body.back() != '!' && body.back() != '?') {
        body += '.';
    }
    return body + " The provided passages confirm each part of this statement, and together they"
                  " give the full account needed to answer the question.";
}

std::string scripted_decompose(const std::map<std::string, std::string>& vars) {
    std::string claim = get_var(vars, "claim");
    json out = json::array();
    size_t pos = 0;
    const std::string joiner = kJoiner;
    std::string remaining = claim;
    std::vector<std::string> parts;
    while ((pos = remaining.find(joiner)) != std::string::npos) {
        parts.push_back(remaining.substr(0, pos));
        remaining = remaining.substr(pos + joiner.size());
    }
    parts.push_back(remaining);
    for (const std::string& raw : parts) {
        std::string part = upper_first(trim(strip_terminal_period(raw)));
        if (part.empty()) continue;
        std::string cat = categorize_sentence(part, false);
        out.push_back({{"text", part + "."}, {"type", cat}});
    }
    return out.dump(2) + "\n";
}

std::string scripted_entailment(const std::map<std::string, std::string>& vars) {
    std::string evidence = normalize_for_match(get_var(vars, "evidence"));
    std::string chunk = normalize_for_match(get_var(vars, "chunk"));
    if (evidence.empty()) return "no";
    if (chunk.find(evidence) != std::string::npos) return "yes";
    // fall back to token coverage for lightly reworded evidence
    std::vector<std::string> ev_words = split_words(evidence);
    if (ev_words.empty()) return "no";
    size_t hit = 0;
    for (const std::string& w : ev_words) {
        if (contains_word(chunk, w)) ++hit;
    }
    double coverage = static_cast<double>(hit) / static_cast<double>(ev_words.size());
    return coverage >= 0.9 ? "yes" : "no";
}

std::string scripted_judge(const std::map<std::string, std::string>& vars) {
    std::string first = get_var(vars, "answer_first");
    std::string second = get_var(vars, "answer_second");
    return first.size() >= second.size() ? "FIRST" : "SECOND";
}

std::string scripted_rag_answer(const std::map<std::string, std::string>& vars) {
    std::string question = to_lower(get_var(vars, "question"));
    std::string context = get_var(vars, "context");
    std::vector<std::string> q_words = split_words(normalize_for_match(question));
    std::string best;
    double best_score = -1.0;
    for (const std::string& sentence : split_sentences(context)) {
        std::string lowered = normalize_for_match(sentence);
        size_t hit = 0;
        for (const std::string& w : q_words) {
            if (w.size() > 3 && contains_word(lowered, w)) ++hit;
        }
        double score = static_cast<double>(hit);
        if (score > best_score) {
            best_score = score;
            best = collapse_whitespace(sentence);
        }
    }
    if (best.empty()) best = "the passages do not say";
    return "Based on the retrieved passages: " + best;
}

}  // namespace

std::string ScriptedChatProvider::chat(const std::string& template_id,
                                       const std::map<std::string, std::string>& variables,
                                       const std::string&, const ChatParams&) {
    if (template_id == "claim_extract") return scripted_extract(variables);
    if (template_id == "claim_extract_repair") return "[]";
    if (template_id == "multihop_generate") return scripted_multihop(variables);
    if (template_id == "question_generate") return scripted_question(variables);
    if (template_id == "question_generate_repair") return scripted_question(variables);
    if (template_id == "answer_decontextualize") return scripted_answer(variables);
    if (template_id == "evidence_decompose") return scripted_decompose(variables);
    if (template_id == "evidence_decompose_repair") return scripted_decompose(variables);
    if (template_id == "entailment_check") return scripted_entailment(variables);
    if (template_id == "judge_pairwise") return scripted_judge(variables);
    if (template_id == "rag_answer") return scripted_rag_answer(variables);
    throw UsageError("scripted provider has no behavior for template '" + template_id + "'");
}

}  // namespace mhts

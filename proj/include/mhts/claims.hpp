#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhts/corpus.hpp"
#include "mhts/gateway.hpp"

namespace mhts {

enum class ReasoningCategory { one_hop, conjunction, existence, multi_hop, negation };

// Tolerant of hyphens, spaces and case ("Multi-Hop" -> multi_hop).
std::optional<ReasoningCategory> parse_category(const std::string& raw);
std::string to_string(ReasoningCategory c);

struct Claim {
    std::string id;
    std::string text;
    ReasoningCategory category = ReasoningCategory::one_hop;
    std::vector<int> source_chunks;    // sorted, unique
    int level = 0;                     // 0 = extracted, >=1 = multi-hop
    std::vector<std::string> parents;  // claim ids, empty at level 0
};

nlohmann::json claim_to_json(const Claim& claim);
Claim claim_from_json(const nlohmann::json& j);

struct ClaimsOptions {
    int max_claims_per_chunk = 25;
    double temperature = 0.0;
    int max_output_tokens = 2048;
};

// Finds the first well-formed JSON array embedded in (possibly chatty)
// model output. Returns nullopt when none parses.
std::optional<nlohmann::json> extract_first_json_array(const std::string& text);

// One LLM call per chunk; items missing text or a recognizable category are
// dropped with a warning. A fully unparseable response gets one structured
// repair retry before erroring.
std::vector<Claim> extract_claims(Gateway& gateway, const Chunk& chunk,
                                  const ClaimsOptions& options);

struct ClaimValidationReport {
    std::vector<std::string> flags;
    bool ok() const { return flags.empty(); }
};

// Advisory checks on a level-0 claim: leading unresolved pronoun, empty
// text, provenance mismatch against the chunk it was extracted from.
ClaimValidationReport validate_claim(const Claim& claim, const Chunk& chunk);

}  // namespace mhts

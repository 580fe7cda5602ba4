#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhts/claims.hpp"
#include "mhts/corpus.hpp"
#include "mhts/gateway.hpp"

namespace mhts {

enum class EvidenceType { one_hop, conjunction, existence, negation };
std::optional<EvidenceType> parse_evidence_type(const std::string& raw);
std::string to_string(EvidenceType t);

enum class SupportStatus { unset, supported, implicit_supposition, hallucination };
std::string to_string(SupportStatus s);

struct Evidence {
    std::string id;
    std::string text;
    EvidenceType etype = EvidenceType::one_hop;
    int position = 0;
    SupportStatus status = SupportStatus::unset;
    std::vector<int> supporting_chunks;  // non-empty iff supported
    double similarity = 0.0;             // mean cosine over supporting chunks
};

struct DifficultyReport {
    std::string qa_id;
    std::vector<Evidence> evidences;
    int hop_count = 0;      // supported + implicit_supposition
    double similarity = 0;  // s; 0 with no_support flag when nothing mapped
    double lambda = 1.0;
    double difficulty = 0;  // h - lambda * s
    bool no_support = false;
};

nlohmann::json difficulty_report_to_json(const DifficultyReport& r);
DifficultyReport difficulty_report_from_json(const nlohmann::json& j);

// Decomposes a multi-hop claim into typed atomic evidences (the multi-hop
// type itself is not allowed; one repair retry when the model emits it).
std::vector<Evidence> decompose_claim(Gateway& gateway, const Claim& claim,
                                      double temperature = 0.0);

// Entailment check of one evidence against each candidate chunk; returns
// the indices of entailing chunks.
std::vector<int> map_evidence(Gateway& gateway, const Evidence& evidence,
                              const std::vector<Chunk>& candidate_chunks,
                              double temperature = 0.0);

// Pure function of the mapped/unmapped pattern: mapped -> supported;
// unmapped with a mapped evidence strictly before AND strictly after ->
// implicit supposition; otherwise hallucination. The adjacent_only variant
// requires the immediate neighbors to be mapped.
void classify_support(std::vector<Evidence>& evidences, bool adjacent_only = false);

struct SimilarityResult {
    double mean_similarity = 0.0;  // s
    std::vector<double> per_evidence;
    bool no_support = false;
};

// Per supported evidence: mean cosine(question, chunk) over its supporting
// chunks; s is the unweighted mean over supported evidences. Implicit
// suppositions count toward h but never toward s.
SimilarityResult compute_similarity(std::span<const double> question_embedding,
                                    const std::vector<Evidence>& evidences,
                                    const std::vector<Vec>& chunk_embeddings);

int hop_count(const std::vector<Evidence>& evidences);

double difficulty_score(int h, double s, double lambda);

// Sorts by difficulty (ties by qa_id), splits into equal-count quantile
// buckets, and draws up to samples_per_bucket from each (seeded, without
// replacement). Returns qa_ids per bucket.
std::vector<std::vector<std::string>> bucket_by_difficulty(
    const std::vector<DifficultyReport>& reports, int n_buckets, int samples_per_bucket,
    uint64_t seed);

}  // namespace mhts

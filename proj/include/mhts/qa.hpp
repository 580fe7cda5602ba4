#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhts/claims.hpp"
#include "mhts/gateway.hpp"

namespace mhts {

struct QaPair {
    std::string id;
    std::string claim_id;
    std::string question;
    std::string answer;
    std::vector<int> context_chunks;  // 3..6, question-ranked then claim-novel
    Vec question_embedding;
};

nlohmann::json qa_pair_to_json(const QaPair& qa);
QaPair qa_pair_from_json(const nlohmann::json& j);

// Prompts with the multi-hop claim alone; requires a single sentence ending
// in '?'. One repair retry, then error. Chatty wrappers around the question
// are stripped.
std::string generate_question(Gateway& gateway, const Claim& claim, double temperature = 0.0);

// Pulls the question out of model prose; empty when no sentence ends in '?'.
std::string extract_question_sentence(const std::string& response);

// Cosine ranking, descending; ties broken by ascending chunk index.
std::vector<int> top_k_chunks_by_similarity(std::span<const double> query_embedding,
                                            const std::vector<Vec>& chunk_embeddings, int k);

// Top-3 question-similar chunks over the whole corpus, then the claim's own
// chunks (question-ranked, up to 3), deduplicated in that order.
std::vector<int> assemble_context(std::span<const double> question_embedding, const Claim& claim,
                                  const std::vector<Vec>& chunk_embeddings);

std::string decontextualize_answer(Gateway& gateway, const Claim& claim,
                                   const std::string& question,
                                   const std::vector<std::string>& context_texts,
                                   double temperature = 0.0);

}  // namespace mhts

#include "mhts/qa.hpp"

#include <algorithm>
#include <set>

#include "mhts/errors.hpp"
#include "mhts/log.hpp"
#include "mhts/text.hpp"

namespace mhts {

nlohmann::json qa_pair_to_json(const QaPair& qa) {
    return nlohmann::json{{"id", qa.id},
                          {"claim_id", qa.claim_id},
                          {"question", qa.question},
                          {"answer", qa.answer},
                          {"context_chunks", qa.context_chunks},
                          {"question_embedding", qa.question_embedding}};
}

QaPair qa_pair_from_json(const nlohmann::json& j) {
    QaPair qa;
    qa.id = j.at("id").get<std::string>();
    qa.claim_id = j.at("claim_id").get<std::string>();
    qa.question = j.at("question").get<std::string>();
    qa.answer = j.at("answer").get<std::string>();
    qa.context_chunks = j.at("context_chunks").get<std::vector<int>>();
    if (j.contains("question_embedding")) qa.question_embedding = j.at("question_embedding").get<Vec>();
    return qa;
}

std::string extract_question_sentence(const std::string& response) {
    std::string text = trim(response);
    if (text.empty()) return "";
    size_t qmark = text.rfind('?');
    if (qmark == std::string::npos) return "";
    // walk back to the previous sentence boundary (or start)
    size_t begin = 0;
    for (size_t i = qmark; i > 0; --i) {
        char c = text[i - 1];
        if (c == '.' || c == '!' || c == '?' || c == '\n' || c == ':') {
            begin = i;
            break;
        }
    }
    std::string candidate = trim(text.substr(begin, qmark - begin + 1));
    // strip a stray opening quote left behind by chatty wrappers
    while (!candidate.empty() && (candidate.front() == '"' || candidate.front() == '\'')) {
        candidate.erase(candidate.begin());
    }
    return trim(candidate);
}

std::string generate_question(Gateway& gateway, const Claim& claim, double temperature) {
    if (claim.level < 1) throw UsageError("generate_question expects a multi-hop claim");

    ChatRequest req;
    req.prompt_template_id = "question_generate";
    req.variables = {{"claim", claim.text}};
    req.temperature = temperature;
    std::string question = extract_question_sentence(gateway.chat(req));
    if (!question.empty()) return question;

    log_warn("question for claim " + claim.id + " failed validation; retrying with repair prompt");
    ChatRequest repair;
    repair.prompt_template_id = "question_generate_repair";
    repair.variables = {{"claim", claim.text}};
    repair.temperature = temperature;
    question = extract_question_sentence(gateway.chat(repair));
    if (question.empty()) {
        throw StageError("question generation for claim " + claim.id +
                         " produced no interrogative sentence after retry");
    }
    return question;
}

std::vector<int> top_k_chunks_by_similarity(std::span<const double> query_embedding,
                                            const std::vector<Vec>& chunk_embeddings, int k) {
    if (k < 1) throw UsageError("top_k_chunks_by_similarity: k must be >= 1");
    std::vector<int> order(chunk_embeddings.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::vector<double> sims(chunk_embeddings.size());
    for (size_t i = 0; i < chunk_embeddings.size(); ++i) {
        sims[i] = cosine_similarity(query_embedding, chunk_embeddings[i]);
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sims[a] > sims[b]; });
    if (order.size() > static_cast<size_t>(k)) order.resize(static_cast<size_t>(k));
    return order;
}

std::vector<int> assemble_context(std::span<const double> question_embedding, const Claim& claim,
                                  const std::vector<Vec>& chunk_embeddings) {
    if (claim.source_chunks.empty()) {
        throw UsageError("assemble_context: claim has no source chunks");
    }
    std::vector<int> question_top =
        top_k_chunks_by_similarity(question_embedding, chunk_embeddings,
                                   std::min<int>(3, static_cast<int>(chunk_embeddings.size())));

    // the claim's own chunks, question-ranked, best 3
    std::vector<int> claim_chunks = claim.source_chunks;
    std::vector<double> sims(claim_chunks.size());
    for (size_t i = 0; i < claim_chunks.size(); ++i) {
        size_t idx = static_cast<size_t>(claim_chunks[i]);
        if (idx >= chunk_embeddings.size()) {
            throw UsageError("assemble_context: claim references unknown chunk " +
                             std::to_string(claim_chunks[i]));
        }
        sims[i] = cosine_similarity(question_embedding, chunk_embeddings[idx]);
    }
    std::vector<size_t> order(claim_chunks.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return claim_chunks[a] < claim_chunks[b];
    });

    std::vector<int> result = question_top;
    std::set<int> seen(result.begin(), result.end());
    size_t taken = 0;
    for (size_t pos : order) {
        if (taken == 3) break;
        ++taken;
        int idx = claim_chunks[pos];
        if (seen.insert(idx).second) result.push_back(idx);
    }
    return result;
}

std::string decontextualize_answer(Gateway& gateway, const Claim& claim,
                                   const std::string& question,
                                   const std::vector<std::string>& context_texts,
                                   double temperature) {
    if (context_texts.empty()) throw UsageError("decontextualize_answer: empty context");
    std::string context;
    for (size_t i = 0; i < context_texts.size(); ++i) {
        context += "[Passage " + std::to_string(i + 1) + "]\n" + context_texts[i] + "\n\n";
    }
    ChatRequest req;
    req.prompt_template_id = "answer_decontextualize";
    req.variables = {{"question", question}, {"claim", claim.text}, {"context", context}};
    req.temperature = temperature;
    std::string answer = gateway.chat(req);
    if (trim(answer).empty()) throw StageError("empty answer for claim " + claim.id);
    return answer;  // stored verbatim
}

}  // namespace mhts

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhts/claims.hpp"
#include "mhts/difficulty.hpp"
#include "mhts/gateway.hpp"
#include "mhts/qa.hpp"

namespace mhts {

struct RetrievalResult {
    std::string question_id;
    std::vector<int> stage1;  // top-10 cosine
    std::vector<int> stage2;  // reranked top-3, subset of stage1
};

// stage1 = top-10 by cosine (ties toward the lower index); stage2 = rerank
// of stage1 texts down to min(3, |stage1|).
RetrievalResult retrieve_baseline(Gateway& gateway, std::span<const double> question_embedding,
                                  const std::vector<Vec>& chunk_embeddings,
                                  const std::string& question_text,
                                  const std::vector<std::string>& chunk_texts);

std::string answer_with_rag(Gateway& gateway, const std::string& question,
                            const std::vector<std::string>& stage2_texts,
                            double temperature = 0.0);

// G = top-3 of the claim's source chunks by question cosine; result =
// G then stage2-novel, at most 6.
std::vector<int> build_gt_context(std::span<const double> question_embedding, const Claim& claim,
                                  const RetrievalResult& retrieval,
                                  const std::vector<Vec>& chunk_embeddings);

enum class JudgeMetric { comprehensiveness, diversity, empowerment };
JudgeMetric judge_metric_from_string(const std::string& s);
std::string to_string(JudgeMetric m);
const std::vector<JudgeMetric>& all_judge_metrics();

enum class PassWinner { first, second };
enum class Outcome { win, tie, lose };
std::string to_string(Outcome o);

// One judged comparison; position context lets the synthetic judge stay
// deterministic per (question, metric, pass).
struct JudgeContext {
    std::string question_id;
    double difficulty = 0.0;
    int pass_index = 0;  // 0: GT first, 1: RAG first
};

class Judge {
public:
    virtual ~Judge() = default;
    virtual PassWinner pick(const std::string& question, const std::string& first_answer,
                            const std::string& second_answer, JudgeMetric metric,
                            const JudgeContext& ctx) = 0;
};

// LLM judge through the gateway; strict FIRST/SECOND parse with a prose
// fallback, one repair retry.
class GatewayJudge : public Judge {
public:
    explicit GatewayJudge(Gateway& gateway, double temperature = 0.0)
        : gateway_(gateway), temperature_(temperature) {}
    PassWinner pick(const std::string& question, const std::string& first_answer,
                    const std::string& second_answer, JudgeMetric metric,
                    const JudgeContext& ctx) override;

private:
    Gateway& gateway_;
    double temperature_;
};

// Prefers the ground-truth answer with probability
// p(D) = clamp(0.4 + 0.1 * D, 0, 1); seeded and deterministic per
// (question, metric, pass).
class SyntheticJudge : public Judge {
public:
    explicit SyntheticJudge(uint64_t seed) : seed_(seed) {}
    PassWinner pick(const std::string& question, const std::string& first_answer,
                    const std::string& second_answer, JudgeMetric metric,
                    const JudgeContext& ctx) override;
    static double preference_probability(double difficulty);

private:
    uint64_t seed_;
};

// Parses a judge response: a FIRST/SECOND token, else prose patterns.
std::optional<PassWinner> parse_judge_verdict(const std::string& response);

struct JudgeVerdict {
    std::string question_id;
    JudgeMetric metric = JudgeMetric::comprehensiveness;
    PassWinner pass1_winner = PassWinner::first;  // order (GT, RAG)
    PassWinner pass2_winner = PassWinner::first;  // order (RAG, GT)
    Outcome outcome = Outcome::tie;               // from GT's perspective
};

nlohmann::json judge_verdict_to_json(const JudgeVerdict& v);
JudgeVerdict judge_verdict_from_json(const nlohmann::json& j);

// Two passes with swapped presentation order; unanimous GT -> win,
// unanimous RAG -> lose, split -> tie.
JudgeVerdict swap_aggregate(Judge& judge, const std::string& question,
                            const std::string& gt_answer, const std::string& rag_answer,
                            JudgeMetric metric, const JudgeContext& base_ctx);

Outcome aggregate_outcome(PassWinner pass1, PassWinner pass2);

// Pearson product-moment correlation; nullopt when either series has zero
// variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

enum class WinrateBucketing { by_hop, by_difficulty_quantile };

struct WinrateBucket {
    std::string label;
    double x = 0.0;  // hop value or bucket-mean difficulty
    int wins = 0, ties = 0, losses = 0;
    std::map<std::string, Vec> per_metric;  // metric -> {wins, ties, losses}
    std::optional<double> win_rate() const {
        int total = wins + ties + losses;
        if (total == 0) return std::nullopt;
        return static_cast<double>(wins) / static_cast<double>(total);
    }
};

struct CorrelationReport {
    WinrateBucketing bucketing = WinrateBucketing::by_difficulty_quantile;
    std::vector<WinrateBucket> buckets;
    std::optional<double> pearson_r;  // pooled win rate vs bucket x
    bool zero_variance = false;
};

struct QaDifficultyKey {
    int hop_count = 0;
    double difficulty = 0.0;
};

CorrelationReport winrate_table(const std::vector<JudgeVerdict>& verdicts,
                                const std::map<std::string, QaDifficultyKey>& difficulty_by_qa,
                                WinrateBucketing bucketing, int n_buckets);

nlohmann::json correlation_report_to_json(const CorrelationReport& report);
std::string correlation_report_to_csv(const CorrelationReport& report);

}  // namespace mhts

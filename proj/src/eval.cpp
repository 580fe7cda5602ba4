#include "mhts/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

#include "mhts/errors.hpp"
#include "mhts/log.hpp"
#include "mhts/text.hpp"

namespace mhts {

RetrievalResult retrieve_baseline(Gateway& gateway, std::span<const double> question_embedding,
                                  const std::vector<Vec>& chunk_embeddings,
                                  const std::string& question_text,
                                  const std::vector<std::string>& chunk_texts) {
    if (chunk_embeddings.empty()) throw UsageError("retrieve_baseline: empty corpus");
    RetrievalResult result;
    result.stage1 = top_k_chunks_by_similarity(
        question_embedding, chunk_embeddings,
        std::min<int>(10, static_cast<int>(chunk_embeddings.size())));

    std::vector<std::string> stage1_texts;
    stage1_texts.reserve(result.stage1.size());
    for (int idx : result.stage1) stage1_texts.push_back(chunk_texts[static_cast<size_t>(idx)]);
    int top_k = std::min<int>(3, static_cast<int>(result.stage1.size()));
    for (int pos : gateway.rerank(question_text, stage1_texts, top_k)) {
        result.stage2.push_back(result.stage1[static_cast<size_t>(pos)]);
    }
    return result;
}

std::string answer_with_rag(Gateway& gateway, const std::string& question,
                            const std::vector<std::string>& stage2_texts, double temperature) {
    if (stage2_texts.empty()) throw UsageError("answer_with_rag: empty context");
    std::string context;
    for (size_t i = 0; i < stage2_texts.size(); ++i) {
        context += "[Passage " + std::to_string(i + 1) + "]\n" + stage2_texts[i] + "\n\n";
    }
    ChatRequest req;
    req.prompt_template_id = "rag_answer";
    req.variables = {{"question", question}, {"context", context}};
    req.temperature = temperature;
    std::string answer = gateway.chat(req);
    if (trim(answer).empty()) throw StageError("rag answer came back empty");
    return answer;
}

std::vector<int> build_gt_context(std::span<const double> question_embedding, const Claim& claim,
                                  const RetrievalResult& retrieval,
                                  const std::vector<Vec>& chunk_embeddings) {
    if (claim.source_chunks.empty()) throw UsageError("build_gt_context: claim has no sources");

    std::vector<int> gold = claim.source_chunks;
    std::vector<double> sims(gold.size());
    for (size_t i = 0; i < gold.size(); ++i) {
        sims[i] = cosine_similarity(question_embedding,
                                    chunk_embeddings[static_cast<size_t>(gold[i])]);
    }
    std::vector<size_t> order(gold.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return gold[a] < gold[b];
    });

    std::vector<int> result;
    std::set<int> seen;
    for (size_t i = 0; i < order.size() && result.size() < 3; ++i) {
        int idx = gold[order[i]];
        if (seen.insert(idx).second) result.push_back(idx);
    }
    for (int idx : retrieval.stage2) {
        if (seen.insert(idx).second) result.push_back(idx);
    }
    return result;
}

JudgeMetric judge_metric_from_string(const std::string& s) {
    if (s == "comprehensiveness") return JudgeMetric::comprehensiveness;
    if (s == "diversity") return JudgeMetric::diversity;
    if (s == "empowerment") return JudgeMetric::empowerment;
    throw UsageError("unknown judge metric: " + s);
}

std::string to_string(JudgeMetric m) {
    switch (m) {
        case JudgeMetric::comprehensiveness: return "comprehensiveness";
        case JudgeMetric::diversity: return "diversity";
        case JudgeMetric::empowerment: return "empowerment";
    }
    return "?";
}

const std::vector<JudgeMetric>& all_judge_metrics() {
    static const std::vector<JudgeMetric> kAll{
        JudgeMetric::comprehensiveness, JudgeMetric::diversity, JudgeMetric::empowerment};
    return kAll;
}

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::win: return "win";
        case Outcome::tie: return "tie";
        case Outcome::lose: return "lose";
    }
    return "?";
}

namespace {

const char* metric_rubric(JudgeMetric m) {
    switch (m) {
        case JudgeMetric::comprehensiveness:
            return "How thoroughly does the answer cover every part of the question, "
                   "including details required to fully resolve it?";
        case JudgeMetric::diversity:
            return "How rich and varied is the answer in the perspectives, entities, and "
                   "pieces of evidence it draws on?";
        case JudgeMetric::empowerment:
            return "How well does the answer equip the reader to understand the topic and "
                   "make informed judgments about it?";
    }
    return "";
}

}  // namespace

std::optional<PassWinner> parse_judge_verdict(const std::string& response) {
    std::string upper;
    upper.reserve(response.size());
    for (char c : response) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));

    auto has_token = [&](const std::string& token) {
        size_t pos = upper.find(token);
        while (pos != std::string::npos) {
            bool left = pos == 0 || !std::isalpha(static_cast<unsigned char>(upper[pos - 1]));
            size_t end = pos + token.size();
            bool right = end >= upper.size() || !std::isalpha(static_cast<unsigned char>(upper[end]));
            if (left && right) return true;
            pos = upper.find(token, pos + 1);
        }
        return false;
    };

    bool first = has_token("FIRST");
    bool second = has_token("SECOND");
    if (first && !second) return PassWinner::first;
    if (second && !first) return PassWinner::second;
    if (first && second) {
        // prose like "the second answer is better than the first": the
        // token naming the winner precedes "better"; fall back to the one
        // after it ("better is the second answer")
        size_t better = upper.find("BETTER");
        if (better == std::string::npos) return std::nullopt;
        size_t fpos = upper.rfind("FIRST", better);
        size_t spos = upper.rfind("SECOND", better);
        if (fpos != std::string::npos || spos != std::string::npos) {
            if (fpos == std::string::npos) return PassWinner::second;
            if (spos == std::string::npos) return PassWinner::first;
            return fpos > spos ? PassWinner::first : PassWinner::second;
        }
        fpos = upper.find("FIRST", better);
        spos = upper.find("SECOND", better);
        if (fpos == std::string::npos) return PassWinner::second;
        if (spos == std::string::npos) return PassWinner::first;
        return fpos < spos ? PassWinner::first : PassWinner::second;
    }
    return std::nullopt;
}

PassWinner GatewayJudge::pick(const std::string& question, const std::string& first_answer,
                              const std::string& second_answer, JudgeMetric metric,
                              const JudgeContext&) {
    ChatRequest req;
    req.prompt_template_id = "judge_pairwise";
    req.variables = {{"question", question},
                     {"metric", to_string(metric)},
                     {"rubric", metric_rubric(metric)},
                     {"answer_first", first_answer},
                     {"answer_second", second_answer}};
    req.temperature = temperature_;
    std::string response = gateway_.chat(req);
    if (auto verdict = parse_judge_verdict(response)) return *verdict;

    log_warn("judge verdict unparseable; retrying with repair prompt");
    ChatRequest repair;
    repair.prompt_template_id = "judge_pairwise_repair";
    repair.variables = req.variables;
    repair.variables["raw"] = response;
    repair.temperature = temperature_;
    response = gateway_.chat(repair);
    if (auto verdict = parse_judge_verdict(response)) return *verdict;
    throw StageError("judge produced no parseable FIRST/SECOND verdict after retry");
}

double SyntheticJudge::preference_probability(double difficulty) {
    return std::clamp(0.4 + 0.1 * difficulty, 0.0, 1.0);
}

PassWinner SyntheticJudge::pick(const std::string&, const std::string&, const std::string&,
                                JudgeMetric metric, const JudgeContext& ctx) {
    double p = preference_probability(ctx.difficulty);
    uint64_t h = fnv1a64(ctx.question_id);
    h = fnv1a64(to_string(metric), h);
    h = fnv1a64(std::to_string(ctx.pass_index), h);
    h = splitmix64(h ^ splitmix64(seed_));
    double draw = static_cast<double>(h >> 11) * 0x1.0p-53;
    bool prefers_gt = draw < p;
    // pass 0 presents GT first, pass 1 presents GT second
    if (ctx.pass_index == 0) return prefers_gt ? PassWinner::first : PassWinner::second;
    return prefers_gt ? PassWinner::second : PassWinner::first;
}

Outcome aggregate_outcome(PassWinner pass1, PassWinner pass2) {
    // pass1 order (GT, RAG): GT won iff "first"; pass2 order (RAG, GT): GT
    // won iff "second"
    bool gt1 = pass1 == PassWinner::first;
    bool gt2 = pass2 == PassWinner::second;
    if (gt1 && gt2) return Outcome::win;
    if (!gt1 && !gt2) return Outcome::lose;
    return Outcome::tie;
}

JudgeVerdict swap_aggregate(Judge& judge, const std::string& question,
                            const std::string& gt_answer, const std::string& rag_answer,
                            JudgeMetric metric, const JudgeContext& base_ctx) {
    if (gt_answer.empty() || rag_answer.empty()) {
        throw UsageError("swap_aggregate: answers must be non-empty");
    }
    JudgeContext ctx1 = base_ctx;
    ctx1.pass_index = 0;
    JudgeContext ctx2 = base_ctx;
    ctx2.pass_index = 1;

    JudgeVerdict verdict;
    verdict.question_id = base_ctx.question_id;
    verdict.metric = metric;
    verdict.pass1_winner = judge.pick(question, gt_answer, rag_answer, metric, ctx1);
    verdict.pass2_winner = judge.pick(question, rag_answer, gt_answer, metric, ctx2);
    verdict.outcome = aggregate_outcome(verdict.pass1_winner, verdict.pass2_winner);
    return verdict;
}

nlohmann::json judge_verdict_to_json(const JudgeVerdict& v) {
    return nlohmann::json{{"question_id", v.question_id},
                          {"metric", to_string(v.metric)},
                          {"pass1_winner", v.pass1_winner == PassWinner::first ? "first" : "second"},
                          {"pass2_winner", v.pass2_winner == PassWinner::first ? "first" : "second"},
                          {"outcome", to_string(v.outcome)}};
}

JudgeVerdict judge_verdict_from_json(const nlohmann::json& j) {
    JudgeVerdict v;
    v.question_id = j.at("question_id").get<std::string>();
    v.metric = judge_metric_from_string(j.at("metric").get<std::string>());
    v.pass1_winner =
        j.at("pass1_winner").get<std::string>() == "first" ? PassWinner::first : PassWinner::second;
    v.pass2_winner =
        j.at("pass2_winner").get<std::string>() == "first" ? PassWinner::first : PassWinner::second;
    std::string outcome = j.at("outcome").get<std::string>();
    v.outcome = outcome == "win" ? Outcome::win : outcome == "lose" ? Outcome::lose : Outcome::tie;
    return v;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw UsageError("pearson: series length mismatch");
    if (x.size() < 2) throw UsageError("pearson: need at least 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

CorrelationReport winrate_table(const std::vector<JudgeVerdict>& verdicts,
                                const std::map<std::string, QaDifficultyKey>& difficulty_by_qa,
                                WinrateBucketing bucketing, int n_buckets) {
    CorrelationReport report;
    report.bucketing = bucketing;
    for (const JudgeVerdict& v : verdicts) {
        if (!difficulty_by_qa.count(v.question_id)) {
            throw UsageError("winrate_table: no difficulty report for " + v.question_id);
        }
    }

    // assign each verdict a bucket index
    std::vector<int> bucket_of(verdicts.size(), -1);
    if (bucketing == WinrateBucketing::by_hop) {
        std::set<int> hop_values;
        for (const JudgeVerdict& v : verdicts) {
            hop_values.insert(difficulty_by_qa.at(v.question_id).hop_count);
        }
        std::vector<int> hops(hop_values.begin(), hop_values.end());
        report.buckets.resize(hops.size());
        for (size_t b = 0; b < hops.size(); ++b) {
            report.buckets[b].label = "h=" + std::to_string(hops[b]);
            report.buckets[b].x = static_cast<double>(hops[b]);
        }
        for (size_t i = 0; i < verdicts.size(); ++i) {
            int h = difficulty_by_qa.at(verdicts[i].question_id).hop_count;
            bucket_of[i] = static_cast<int>(
                std::lower_bound(hops.begin(), hops.end(), h) - hops.begin());
        }
    } else {
        if (n_buckets < 2) throw UsageError("winrate_table: need at least 2 buckets");
        // quantile split over the distinct qa ids present in the verdicts
        std::vector<std::pair<double, std::string>> keyed;
        std::set<std::string> seen;
        for (const JudgeVerdict& v : verdicts) {
            if (seen.insert(v.question_id).second) {
                keyed.emplace_back(difficulty_by_qa.at(v.question_id).difficulty, v.question_id);
            }
        }
        if (keyed.size() < static_cast<size_t>(n_buckets)) {
            throw UsageError("winrate_table: fewer qa pairs than buckets");
        }
        std::sort(keyed.begin(), keyed.end());
        std::map<std::string, int> bucket_by_qa;
        report.buckets.resize(static_cast<size_t>(n_buckets));
        const size_t n = keyed.size();
        for (int b = 0; b < n_buckets; ++b) {
            size_t begin = n * static_cast<size_t>(b) / static_cast<size_t>(n_buckets);
            size_t end = n * static_cast<size_t>(b + 1) / static_cast<size_t>(n_buckets);
            double mean_d = 0.0;
            for (size_t i = begin; i < end; ++i) {
                bucket_by_qa[keyed[i].second] = b;
                mean_d += keyed[i].first;
            }
            report.buckets[static_cast<size_t>(b)].label = "q" + std::to_string(b + 1);
            report.buckets[static_cast<size_t>(b)].x =
                end > begin ? mean_d / static_cast<double>(end - begin) : 0.0;
        }
        for (size_t i = 0; i < verdicts.size(); ++i) {
            bucket_of[i] = bucket_by_qa.at(verdicts[i].question_id);
        }
    }

    for (size_t i = 0; i < verdicts.size(); ++i) {
        WinrateBucket& bucket = report.buckets[static_cast<size_t>(bucket_of[i])];
        std::string metric = to_string(verdicts[i].metric);
        if (!bucket.per_metric.count(metric)) bucket.per_metric[metric] = Vec(3, 0.0);
        switch (verdicts[i].outcome) {
            case Outcome::win:
                ++bucket.wins;
                bucket.per_metric[metric][0] += 1;
                break;
            case Outcome::tie:
                ++bucket.ties;
                bucket.per_metric[metric][1] += 1;
                break;
            case Outcome::lose:
                ++bucket.losses;
                bucket.per_metric[metric][2] += 1;
                break;
        }
    }

    Vec xs, ys;
    for (const WinrateBucket& bucket : report.buckets) {
        auto rate = bucket.win_rate();
        if (!rate) {
            log_warn("bucket '" + bucket.label + "' holds no verdicts; excluded from pearson");
            continue;
        }
        xs.push_back(bucket.x);
        ys.push_back(*rate);
    }
    if (xs.size() >= 2) {
        report.pearson_r = pearson(xs, ys);
        report.zero_variance = !report.pearson_r.has_value();
    }
    return report;
}

nlohmann::json correlation_report_to_json(const CorrelationReport& report) {
    nlohmann::json buckets = nlohmann::json::array();
    for (const WinrateBucket& b : report.buckets) {
        nlohmann::json per_metric = nlohmann::json::object();
        for (const auto& [metric, wtl] : b.per_metric) {
            int total = static_cast<int>(wtl[0] + wtl[1] + wtl[2]);
            per_metric[metric] = {{"wins", static_cast<int>(wtl[0])},
                                  {"ties", static_cast<int>(wtl[1])},
                                  {"losses", static_cast<int>(wtl[2])},
                                  {"win_rate", total ? nlohmann::json(wtl[0] / total)
                                                     : nlohmann::json(nullptr)}};
        }
        auto rate = b.win_rate();
        buckets.push_back({{"label", b.label},
                           {"x", b.x},
                           {"wins", b.wins},
                           {"ties", b.ties},
                           {"losses", b.losses},
                           {"win_rate", rate ? nlohmann::json(*rate) : nlohmann::json(nullptr)},
                           {"per_metric", per_metric}});
    }
    return nlohmann::json{
        {"bucketing",
         report.bucketing == WinrateBucketing::by_hop ? "by_hop" : "by_difficulty_quantile"},
        {"buckets", buckets},
        {"pearson_r", report.pearson_r ? nlohmann::json(*report.pearson_r) : nlohmann::json(nullptr)},
        {"zero_variance", report.zero_variance}};
}

std::string correlation_report_to_csv(const CorrelationReport& report) {
    std::string csv = "bucket,metric,x,wins,ties,losses,win_rate\n";
    char line[256];
    auto append = [&](const std::string& label, const std::string& metric, double x, int w, int t,
                      int l) {
        int total = w + t + l;
        if (total > 0) {
            std::snprintf(line, sizeof(line), "%s,%s,%.10g,%d,%d,%d,%.10g\n", label.c_str(),
                          metric.c_str(), x, w, t, l, static_cast<double>(w) / total);
        } else {
            std::snprintf(line, sizeof(line), "%s,%s,%.10g,%d,%d,%d,\n", label.c_str(),
                          metric.c_str(), x, w, t, l);
        }
        csv += line;
    };
    for (const WinrateBucket& b : report.buckets) {
        append(b.label, "pooled", b.x, b.wins, b.ties, b.losses);
        for (const auto& [metric, wtl] : b.per_metric) {
            append(b.label, metric, b.x, static_cast<int>(wtl[0]), static_cast<int>(wtl[1]),
                   static_cast<int>(wtl[2]));
        }
    }
    return csv;
}

}  // namespace mhts

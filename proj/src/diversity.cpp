#include "mhts/diversity.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "mhts/errors.hpp"
#include "mhts/jsonl.hpp"
#include "mhts/log.hpp"

namespace mhts {

DistanceMetric distance_metric_from_string(const std::string& s) {
    if (s == "euclidean") return DistanceMetric::euclidean;
    if (s == "cosine_distance" || s == "cosine") return DistanceMetric::cosine_distance;
    throw UsageError("unknown distance metric: " + s);
}

std::string to_string(DistanceMetric m) {
    return m == DistanceMetric::euclidean ? "euclidean" : "cosine_distance";
}

nlohmann::json diversity_report_to_json(const DiversityReport& r) {
    return nlohmann::json{{"dataset_label", r.dataset_label},
                          {"n", r.n},
                          {"avg_pairwise_distance", r.avg_pairwise_distance},
                          {"eigen_variance_sum", r.eigen_variance_sum},
                          {"distance_metric", to_string(r.metric)},
                          {"normalized", r.normalized},
                          {"subsampled", r.subsampled}};
}

double avg_pairwise_distance(const std::vector<Vec>& vectors, DistanceMetric metric) {
    const size_t n = vectors.size();
    if (n < 2) throw UsageError("avg_pairwise_distance: need at least 2 vectors");
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            total += metric == DistanceMetric::euclidean
                         ? euclidean_distance(vectors[i], vectors[j])
                         : 1.0 - cosine_similarity(vectors[i], vectors[j]);
        }
    }
    return total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double eigen_variance_sum(const std::vector<Vec>& vectors) {
    const size_t n = vectors.size();
    if (n < 2) throw UsageError("eigen_variance_sum: need at least 2 vectors");
    const size_t d = vectors[0].size();
    Vec mean(d, 0.0);
    for (const Vec& v : vectors) {
        if (v.size() != d) throw UsageError("eigen_variance_sum: ragged input");
        for (size_t j = 0; j < d; ++j) mean[j] += v[j];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    double trace = 0.0;
    for (size_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (const Vec& v : vectors) {
            double diff = v[j] - mean[j];
            acc += diff * diff;
        }
        trace += acc / static_cast<double>(n - 1);
    }
    return trace;
}

DiversityReport measure_diversity(std::vector<Vec> vectors, const std::string& label,
                                  const DiversityOptions& options) {
    if (options.normalize) {
        for (Vec& v : vectors) v = l2_normalized(v);
    }
    DiversityReport report;
    report.dataset_label = label;
    report.n = vectors.size();
    report.metric = options.metric;
    report.normalized = options.normalize;
    report.avg_pairwise_distance = avg_pairwise_distance(vectors, options.metric);
    report.eigen_variance_sum = eigen_variance_sum(vectors);
    return report;
}

namespace {

std::vector<Vec> subsample(std::vector<Vec> vectors, size_t target, uint64_t seed) {
    std::mt19937_64 rng(splitmix64(seed));
    for (size_t i = 0; i < target; ++i) {
        size_t j = i + static_cast<size_t>(rng() % (vectors.size() - i));
        std::swap(vectors[i], vectors[j]);
    }
    vectors.resize(target);
    return vectors;
}

}  // namespace

std::pair<DiversityReport, DiversityReport> compare_sets(std::vector<Vec> a, std::vector<Vec> b,
                                                         const std::string& label_a,
                                                         const std::string& label_b,
                                                         const DiversityOptions& options) {
    if (a.empty() || b.empty()) throw UsageError("compare_sets: both sets must be non-empty");
    bool a_sub = false, b_sub = false;
    if (a.size() > b.size()) {
        a = subsample(std::move(a), b.size(), options.seed);
        a_sub = true;
        log_info("set '" + label_a + "' subsampled to " + std::to_string(a.size()));
    } else if (b.size() > a.size()) {
        b = subsample(std::move(b), a.size(), options.seed);
        b_sub = true;
        log_info("set '" + label_b + "' subsampled to " + std::to_string(b.size()));
    }
    if (a.size() < 2) throw UsageError("compare_sets: fewer than 2 vectors after matching");
    DiversityReport ra = measure_diversity(std::move(a), label_a, options);
    DiversityReport rb = measure_diversity(std::move(b), label_b, options);
    ra.subsampled = a_sub;
    rb.subsampled = b_sub;
    return {ra, rb};
}

void export_embeddings(const std::vector<LabeledEmbedding>& items, const std::string& out_path) {
    std::set<std::string> ids;
    std::vector<json> records;
    records.reserve(items.size());
    for (const LabeledEmbedding& item : items) {
        if (!ids.insert(item.id).second) throw UsageError("duplicate id: " + item.id);
        records.push_back(
            json{{"label", item.label}, {"id", item.id}, {"vector", item.vector}});
    }
    write_jsonl(out_path, records);
}

std::vector<LabeledEmbedding> import_embeddings(const std::string& path) {
    std::vector<LabeledEmbedding> out;
    for (const json& j : read_jsonl(path)) {
        LabeledEmbedding item;
        item.label = j.at("label").get<std::string>();
        item.id = j.at("id").get<std::string>();
        item.vector = j.at("vector").get<Vec>();
        out.push_back(std::move(item));
    }
    return out;
}

}  // namespace mhts

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhts/vecmath.hpp"

namespace mhts {

enum class DistanceMetric { euclidean, cosine_distance };
DistanceMetric distance_metric_from_string(const std::string& s);
std::string to_string(DistanceMetric m);

struct DiversityReport {
    std::string dataset_label;
    size_t n = 0;
    double avg_pairwise_distance = 0.0;
    double eigen_variance_sum = 0.0;
    DistanceMetric metric = DistanceMetric::euclidean;
    bool normalized = false;
    bool subsampled = false;
};

nlohmann::json diversity_report_to_json(const DiversityReport& r);

// Mean over all n(n-1)/2 unordered pairs. Requires n >= 2.
double avg_pairwise_distance(const std::vector<Vec>& vectors, DistanceMetric metric);

// Trace of the sample covariance matrix (divisor n-1), which equals the sum
// of its eigenvalues without an eigendecomposition. Requires n >= 2.
double eigen_variance_sum(const std::vector<Vec>& vectors);

struct DiversityOptions {
    DistanceMetric metric = DistanceMetric::euclidean;
    bool normalize = true;  // unit-normalize vectors before measuring
    uint64_t seed = 42;     // for count-matching subsampling
};

DiversityReport measure_diversity(std::vector<Vec> vectors, const std::string& label,
                                  const DiversityOptions& options);

// Equal-count comparison: the larger set is subsampled (seeded) down to the
// smaller before measuring.
std::pair<DiversityReport, DiversityReport> compare_sets(std::vector<Vec> a, std::vector<Vec> b,
                                                         const std::string& label_a,
                                                         const std::string& label_b,
                                                         const DiversityOptions& options);

struct LabeledEmbedding {
    std::string label;
    std::string id;
    Vec vector;
};

// JSONL of {label, id, vector}; duplicate ids are an error.
void export_embeddings(const std::vector<LabeledEmbedding>& items, const std::string& out_path);
std::vector<LabeledEmbedding> import_embeddings(const std::string& path);

}  // namespace mhts

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhts/vecmath.hpp"

namespace mhts {

// ---------------------------------------------------------------------------
// Dimensionality reduction (PCA)

struct PcaProjection {
    int input_dim = 0;
    int output_dim = 0;
    Vec mean;                     // input_dim
    std::vector<Vec> components;  // output_dim rows, each input_dim long

    Vec apply(std::span<const double> x) const;
};

struct PcaResult {
    std::vector<Vec> reduced;
    PcaProjection projection;
    Vec explained_variance;  // per retained component
};

// Centers the data and projects onto the top-d_prime principal directions.
// If the sample rank is below d_prime the output dimension shrinks, with a
// warning. Requires n >= 2 and 1 <= d_prime <= d.
PcaResult reduce_dims(const std::vector<Vec>& vectors, int d_prime);

// ---------------------------------------------------------------------------
// Gaussian mixture fitted by EM (diagonal covariances)

struct GmmOptions {
    double tol = 1e-6;
    int max_iter = 200;
    double var_floor = 1e-6;
    int max_collapse_repairs = 3;
    int n_init = 4;  // independent seeded EM restarts; best final LL wins
};

struct GmmModel {
    int num_components = 0;
    int dim = 0;
    Vec weights;                 // K, sums to 1
    std::vector<Vec> means;      // K x dim
    std::vector<Vec> variances;  // K x dim, floored
    std::vector<double> loglik_history;
    uint64_t seed = 0;
};

// Seeded k-means++ initialization, then EM until the log-likelihood gain
// drops below tol or max_iter. The recorded log-likelihood sequence is
// non-decreasing. An emptied component is re-seeded from the point the
// current model explains worst, at most max_collapse_repairs times.
GmmModel fit_gmm(const std::vector<Vec>& points, int num_components, uint64_t seed,
                 const GmmOptions& options = {});

double gmm_log_likelihood(const GmmModel& model, const std::vector<Vec>& points);
double gmm_bic(const GmmModel& model, size_t n);

// Fits K = 1..k_max and returns the K with minimal BIC; ties go to the
// smaller K.
int select_k(const std::vector<Vec>& points, int k_max, uint64_t seed,
             const GmmOptions& options = {});

// Posterior responsibilities gamma(k), computed in log space.
Vec posterior(const GmmModel& model, std::span<const double> x);

// {k : gamma(k) >= theta} plus the argmax component, so no point is left
// unassigned. Argmax ties break toward the lowest index.
std::vector<int> soft_assign(std::span<const double> posteriors, double theta);

struct SoftAssignment {
    std::string claim_id;
    Vec posteriors;
    std::vector<int> member_of;
};

nlohmann::json soft_assignment_to_json(const SoftAssignment& a);
SoftAssignment soft_assignment_from_json(const nlohmann::json& j);

nlohmann::json gmm_model_to_json(const GmmModel& model, const PcaProjection& projection,
                                 double theta);
void gmm_model_from_json(const nlohmann::json& j, GmmModel& model, PcaProjection& projection);

}  // namespace mhts

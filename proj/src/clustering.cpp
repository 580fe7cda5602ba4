#include "mhts/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mhts/errors.hpp"
#include "mhts/log.hpp"

namespace mhts {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double uniform01(std::mt19937_64& rng) {
    // 53-bit mantissa draw; avoids std::uniform_real_distribution for
    // cross-platform reproducibility of seeded runs
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// ---- symmetric eigensolvers -------------------------------------------------

// Cyclic Jacobi. A is overwritten; returns eigenvalues with eigenvectors in
// rows of V. Suitable for the small matrices PCA sees after the covariance
// trick; pairs with the iterative path below for wide inputs.
void jacobi_eigen(std::vector<Vec>& a, std::vector<Vec>& eigvecs, Vec& eigvals) {
    const size_t n = a.size();
    eigvecs.assign(n, Vec(n, 0.0));
    for (size_t i = 0; i < n; ++i) eigvecs[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        }
        if (off < 1e-24) break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    double vpk = eigvecs[p][k], vqk = eigvecs[q][k];
                    eigvecs[p][k] = c * vpk - s * vqk;
                    eigvecs[q][k] = s * vpk + c * vqk;
                }
            }
        }
    }
    eigvals.resize(n);
    for (size_t i = 0; i < n; ++i) eigvals[i] = a[i][i];

    // order by eigenvalue, descending
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t x, size_t y) { return eigvals[x] > eigvals[y]; });
    Vec sorted_vals(n);
    std::vector<Vec> sorted_vecs(n);
    for (size_t i = 0; i < n; ++i) {
        sorted_vals[i] = eigvals[order[i]];
        sorted_vecs[i] = eigvecs[order[i]];
    }
    eigvals = std::move(sorted_vals);
    eigvecs = std::move(sorted_vecs);
}

// Top-k eigenpairs of the sample covariance without forming it: orthogonal
// iteration on v -> X^T (X v) / (n-1) with a Rayleigh-Ritz finish. Used when
// the ambient dimension is too large for Jacobi.
void covariance_topk_eigen(const std::vector<Vec>& centered, size_t dim, int k,
                           std::vector<Vec>& eigvecs, Vec& eigvals) {
    const size_t n = centered.size();
    const double denom = static_cast<double>(n - 1);
    std::mt19937_64 rng(0x5eedc0de);

    std::vector<Vec> q(static_cast<size_t>(k), Vec(dim));
    for (auto& col : q) {
        for (double& x : col) x = uniform01(rng) - 0.5;
    }

    auto apply_cov = [&](const Vec& v) {
        Vec out(dim, 0.0);
        for (const Vec& row : centered) {
            double proj = dot(row, v);
            for (size_t j = 0; j < dim; ++j) out[j] += proj * row[j];
        }
        for (double& x : out) x /= denom;
        return out;
    };

    auto orthonormalize = [&](std::vector<Vec>& cols) {
        for (size_t i = 0; i < cols.size(); ++i) {
            for (size_t j = 0; j < i; ++j) {
                double proj = dot(cols[i], cols[j]);
                for (size_t t = 0; t < dim; ++t) cols[i][t] -= proj * cols[j][t];
            }
            double len = norm(cols[i]);
            if (len < 1e-14) {
                // degenerate direction; replace with a fresh random one
                for (double& x : cols[i]) x = uniform01(rng) - 0.5;
                len = norm(cols[i]);
            }
            for (double& x : cols[i]) x /= len;
        }
    };

    orthonormalize(q);
    Vec prev_rayleigh(static_cast<size_t>(k), 0.0);
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<Vec> z(q.size());
        for (size_t i = 0; i < q.size(); ++i) z[i] = apply_cov(q[i]);
        orthonormalize(z);
        q = std::move(z);

        Vec rayleigh(q.size());
        for (size_t i = 0; i < q.size(); ++i) rayleigh[i] = dot(q[i], apply_cov(q[i]));
        double delta = 0.0;
        for (size_t i = 0; i < q.size(); ++i) {
            delta = std::max(delta, std::abs(rayleigh[i] - prev_rayleigh[i]));
        }
        prev_rayleigh = rayleigh;
        if (iter > 3 && delta < 1e-12) break;
    }

    // Rayleigh-Ritz: eigendecompose the small projected matrix and rotate.
    std::vector<Vec> small(q.size(), Vec(q.size(), 0.0));
    std::vector<Vec> cq(q.size());
    for (size_t i = 0; i < q.size(); ++i) cq[i] = apply_cov(q[i]);
    for (size_t i = 0; i < q.size(); ++i) {
        for (size_t j = 0; j < q.size(); ++j) small[i][j] = dot(q[i], cq[j]);
    }
    std::vector<Vec> rot;
    Vec small_vals;
    jacobi_eigen(small, rot, small_vals);

    eigvals = small_vals;
    eigvecs.assign(q.size(), Vec(dim, 0.0));
    for (size_t r = 0; r < q.size(); ++r) {
        for (size_t i = 0; i < q.size(); ++i) {
            for (size_t t = 0; t < dim; ++t) eigvecs[r][t] += rot[r][i] * q[i][t];
        }
    }
}

}  // namespace

Vec PcaProjection::apply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim) {
        throw UsageError("projection input dimension mismatch");
    }
    Vec centered(x.begin(), x.end());
    for (int j = 0; j < input_dim; ++j) centered[static_cast<size_t>(j)] -= mean[static_cast<size_t>(j)];
    Vec out(static_cast<size_t>(output_dim), 0.0);
    for (int r = 0; r < output_dim; ++r) {
        out[static_cast<size_t>(r)] = dot(components[static_cast<size_t>(r)], centered);
    }
    return out;
}

PcaResult reduce_dims(const std::vector<Vec>& vectors, int d_prime) {
    if (vectors.size() < 2) throw UsageError("reduce_dims: need at least 2 vectors");
    const size_t n = vectors.size();
    const size_t d = vectors[0].size();
    if (d_prime < 1) throw UsageError("reduce_dims: d_prime must be >= 1");
    if (static_cast<size_t>(d_prime) > d) {
        throw UsageError("reduce_dims: d_prime exceeds input dimension");
    }
    for (const Vec& v : vectors) {
        if (v.size() != d) throw UsageError("reduce_dims: ragged input");
    }

    Vec mean(d, 0.0);
    for (const Vec& v : vectors) {
        for (size_t j = 0; j < d; ++j) mean[j] += v[j];
    }
    for (double& m : mean) m /= static_cast<double>(n);

    std::vector<Vec> centered(n, Vec(d));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < d; ++j) centered[i][j] = vectors[i][j] - mean[j];
    }

    std::vector<Vec> eigvecs;
    Vec eigvals;
    if (d <= 128) {
        std::vector<Vec> cov(d, Vec(d, 0.0));
        for (const Vec& row : centered) {
            for (size_t a = 0; a < d; ++a) {
                if (row[a] == 0.0) continue;
                for (size_t b = a; b < d; ++b) cov[a][b] += row[a] * row[b];
            }
        }
        const double denom = static_cast<double>(n - 1);
        for (size_t a = 0; a < d; ++a) {
            for (size_t b = a; b < d; ++b) {
                cov[a][b] /= denom;
                cov[b][a] = cov[a][b];
            }
        }
        jacobi_eigen(cov, eigvecs, eigvals);
        eigvecs.resize(static_cast<size_t>(d_prime));
        eigvals.resize(static_cast<size_t>(d_prime));
    } else {
        covariance_topk_eigen(centered, d, d_prime, eigvecs, eigvals);
    }

    // rank check: tiny eigenvalues do not span anything real
    double lead = std::max(std::abs(eigvals.empty() ? 0.0 : eigvals[0]), 1e-30);
    int effective = 0;
    for (size_t i = 0; i < eigvals.size(); ++i) {
        if (eigvals[i] > lead * 1e-12 && eigvals[i] > 1e-14) ++effective;
    }
    if (effective < d_prime) {
        log_warn("reduce_dims: input rank " + std::to_string(effective) + " below requested " +
                 std::to_string(d_prime) + ", shrinking");
        if (effective == 0) effective = 1;  // keep one direction even for near-constant data
        eigvecs.resize(static_cast<size_t>(effective));
        eigvals.resize(static_cast<size_t>(effective));
        d_prime = effective;
    }

    PcaResult result;
    result.projection.input_dim = static_cast<int>(d);
    result.projection.output_dim = d_prime;
    result.projection.mean = std::move(mean);
    result.projection.components = std::move(eigvecs);
    result.explained_variance = std::move(eigvals);
    result.reduced.reserve(n);
    for (const Vec& v : vectors) result.reduced.push_back(result.projection.apply(v));
    return result;
}

// ---------------------------------------------------------------------------
// GMM

namespace {

double log_gaussian_diag(std::span<const double> x, const Vec& mean, const Vec& var) {
    double acc = 0.0;
    for (size_t j = 0; j < mean.size(); ++j) {
        double diff = x[j] - mean[j];
        acc += std::log(kTwoPi * var[j]) + diff * diff / var[j];
    }
    return -0.5 * acc;
}

std::vector<size_t> kmeanspp_centers(const std::vector<Vec>& points, int k,
                                     std::mt19937_64& rng) {
    const size_t n = points.size();
    std::vector<size_t> centers;
    centers.push_back(static_cast<size_t>(rng() % n));
    Vec d2(n);
    while (centers.size() < static_cast<size_t>(k)) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (size_t c : centers) {
                double dist = euclidean_distance(points[i], points[c]);
                best = std::min(best, dist * dist);
            }
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            // all points coincide with a center; spread deterministically
            centers.push_back(centers.size() % n);
            continue;
        }
        double r = uniform01(rng) * total;
        size_t chosen = n - 1;
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (acc >= r) {
                chosen = i;
                break;
            }
        }
        centers.push_back(chosen);
    }
    return centers;
}

Vec global_variance(const std::vector<Vec>& points, double floor) {
    const size_t n = points.size();
    const size_t d = points[0].size();
    Vec mean(d, 0.0), var(d, 0.0);
    for (const Vec& p : points) {
        for (size_t j = 0; j < d; ++j) mean[j] += p[j];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (const Vec& p : points) {
        for (size_t j = 0; j < d; ++j) {
            double diff = p[j] - mean[j];
            var[j] += diff * diff;
        }
    }
    for (double& v : var) v = std::max(v / std::max<double>(1.0, static_cast<double>(n - 1)), floor);
    return var;
}

}  // namespace

namespace {
GmmModel fit_gmm_single(const std::vector<Vec>& points, int num_components, uint64_t seed,
                        const GmmOptions& options);
}  // namespace

GmmModel fit_gmm(const std::vector<Vec>& points, int num_components, uint64_t seed,
                 const GmmOptions& options) {
    if (num_components < 1) throw UsageError("fit_gmm: K must be >= 1");
    if (points.size() < static_cast<size_t>(num_components)) {
        throw UsageError("fit_gmm: need at least K points");
    }
    int restarts = std::max(1, options.n_init);
    GmmModel best;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        GmmModel candidate = fit_gmm_single(
            points, num_components, splitmix64(seed + 0x9e3779b9ull * static_cast<uint64_t>(r)),
            options);
        double ll = candidate.loglik_history.back();
        if (ll > best_ll) {
            best_ll = ll;
            best = std::move(candidate);
        }
    }
    best.seed = seed;
    return best;
}

namespace {
GmmModel fit_gmm_single(const std::vector<Vec>& points, int num_components, uint64_t seed,
                        const GmmOptions& options) {
    const size_t n = points.size();
    const size_t d = points[0].size();
    const size_t K = static_cast<size_t>(num_components);

    GmmModel model;
    model.num_components = num_components;
    model.dim = static_cast<int>(d);
    model.seed = seed;

    std::mt19937_64 rng(splitmix64(seed));
    std::vector<size_t> centers = kmeanspp_centers(points, num_components, rng);
    Vec fallback_var = global_variance(points, options.var_floor);

    // hard assignment to the k-means++ centers seeds the first M step
    std::vector<size_t> assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < K; ++k) {
            double dist = euclidean_distance(points[i], points[centers[k]]);
            if (dist < best) {
                best = dist;
                assign[i] = k;
            }
        }
    }
    model.weights.assign(K, 0.0);
    model.means.assign(K, Vec(d, 0.0));
    model.variances.assign(K, Vec(d, 0.0));
    std::vector<size_t> counts(K, 0);
    for (size_t i = 0; i < n; ++i) {
        ++counts[assign[i]];
        for (size_t j = 0; j < d; ++j) model.means[assign[i]][j] += points[i][j];
    }
    for (size_t k = 0; k < K; ++k) {
        if (counts[k] == 0) {
            model.means[k] = points[centers[k]];
            model.variances[k] = fallback_var;
            model.weights[k] = 1.0 / static_cast<double>(n);
            continue;
        }
        for (double& m : model.means[k]) m /= static_cast<double>(counts[k]);
        model.weights[k] = static_cast<double>(counts[k]) / static_cast<double>(n);
    }
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < d; ++j) {
            double diff = points[i][j] - model.means[assign[i]][j];
            model.variances[assign[i]][j] += diff * diff;
        }
    }
    for (size_t k = 0; k < K; ++k) {
        if (counts[k] < 2) {
            model.variances[k] = fallback_var;
        } else {
            for (double& v : model.variances[k]) {
                v = std::max(v / static_cast<double>(counts[k]), options.var_floor);
            }
        }
    }
    double weight_sum = 0.0;
    for (double w : model.weights) weight_sum += w;
    for (double& w : model.weights) w /= weight_sum;

    // EM
    std::vector<Vec> resp(n, Vec(K));
    int repairs = 0;
    GmmModel previous = model;

    for (int iter = 0; iter < options.max_iter; ++iter) {
        // E step (also yields the log-likelihood of the current params)
        double loglik = 0.0;
        for (size_t i = 0; i < n; ++i) {
            Vec logp(K);
            for (size_t k = 0; k < K; ++k) {
                logp[k] = std::log(model.weights[k]) +
                          log_gaussian_diag(points[i], model.means[k], model.variances[k]);
            }
            double lse = log_sum_exp(logp);
            loglik += lse;
            for (size_t k = 0; k < K; ++k) resp[i][k] = std::exp(logp[k] - lse);
        }

        if (!model.loglik_history.empty()) {
            double gain = loglik - model.loglik_history.back();
            if (gain < -1e-12) {
                // a floor or repair bent the ascent; keep the better params
                model = previous;
                break;
            }
            model.loglik_history.push_back(loglik);
            if (gain < options.tol) break;
        } else {
            model.loglik_history.push_back(loglik);
        }
        previous = model;

        // M step
        Vec nk(K, 0.0);
        for (size_t i = 0; i < n; ++i) {
            for (size_t k = 0; k < K; ++k) nk[k] += resp[i][k];
        }

        bool collapsed = false;
        for (size_t k = 0; k < K && !collapsed; ++k) {
            if (nk[k] < 1e-8) {
                if (repairs >= options.max_collapse_repairs) {
                    throw StageError("gmm: component collapse persisted after " +
                                     std::to_string(options.max_collapse_repairs) + " repairs");
                }
                ++repairs;
                // re-seed at the point the model currently explains worst
                size_t worst = 0;
                double worst_ll = std::numeric_limits<double>::infinity();
                for (size_t i = 0; i < n; ++i) {
                    Vec logp(K);
                    for (size_t c = 0; c < K; ++c) {
                        logp[c] = std::log(model.weights[c]) +
                                  log_gaussian_diag(points[i], model.means[c], model.variances[c]);
                    }
                    double ll = log_sum_exp(logp);
                    if (ll < worst_ll) {
                        worst_ll = ll;
                        worst = i;
                    }
                }
                model.means[k] = points[worst];
                model.variances[k] = fallback_var;
                model.weights[k] = 1.0 / static_cast<double>(n);
                double sum = 0.0;
                for (double w : model.weights) sum += w;
                for (double& w : model.weights) w /= sum;
                log_warn("gmm: re-seeded empty component " + std::to_string(k));
                collapsed = true;
            }
        }
        if (collapsed) {
            // a repair is a re-initialization: the recorded ascent restarts
            // here, otherwise the next E step would read as a regression and
            // the revert guard would undo the repair
            model.loglik_history.clear();
            previous = model;
            continue;
        }

        for (size_t k = 0; k < K; ++k) {
            model.weights[k] = nk[k] / static_cast<double>(n);
            Vec mean(d, 0.0);
            for (size_t i = 0; i < n; ++i) {
                for (size_t j = 0; j < d; ++j) mean[j] += resp[i][k] * points[i][j];
            }
            for (double& m : mean) m /= nk[k];
            Vec var(d, 0.0);
            for (size_t i = 0; i < n; ++i) {
                for (size_t j = 0; j < d; ++j) {
                    double diff = points[i][j] - mean[j];
                    var[j] += resp[i][k] * diff * diff;
                }
            }
            for (double& v : var) v = std::max(v / nk[k], options.var_floor);
            model.means[k] = std::move(mean);
            model.variances[k] = std::move(var);
        }
    }
    return model;
}
}  // namespace

double gmm_log_likelihood(const GmmModel& model, const std::vector<Vec>& points) {
    double total = 0.0;
    const size_t K = static_cast<size_t>(model.num_components);
    for (const Vec& p : points) {
        Vec logp(K);
        for (size_t k = 0; k < K; ++k) {
            logp[k] = std::log(model.weights[k]) +
                      log_gaussian_diag(p, model.means[k], model.variances[k]);
        }
        total += log_sum_exp(logp);
    }
    return total;
}

double gmm_bic(const GmmModel& model, size_t n) {
    double p = static_cast<double>(model.num_components - 1) +
               2.0 * static_cast<double>(model.num_components) * static_cast<double>(model.dim);
    double ll = model.loglik_history.empty() ? 0.0 : model.loglik_history.back();
    return -2.0 * ll + p * std::log(static_cast<double>(n));
}

int select_k(const std::vector<Vec>& points, int k_max, uint64_t seed, const GmmOptions& options) {
    if (k_max < 1) throw UsageError("select_k: k_max must be >= 1");
    k_max = std::min<int>(k_max, static_cast<int>(points.size()));
    int best_k = 1;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= k_max; ++k) {
        GmmModel model = fit_gmm(points, k, splitmix64(seed + static_cast<uint64_t>(k)), options);
        double bic = gmm_bic(model, points.size());
        if (bic < best_bic) {
            best_bic = bic;
            best_k = k;
        }
    }
    return best_k;
}

Vec posterior(const GmmModel& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.dim) {
        throw UsageError("posterior: dimension mismatch");
    }
    const size_t K = static_cast<size_t>(model.num_components);
    Vec logp(K);
    for (size_t k = 0; k < K; ++k) {
        logp[k] = std::log(model.weights[k]) +
                  log_gaussian_diag(x, model.means[k], model.variances[k]);
    }
    double lse = log_sum_exp(logp);
    Vec gamma(K);
    double sum = 0.0;
    for (size_t k = 0; k < K; ++k) {
        gamma[k] = std::exp(logp[k] - lse);
        sum += gamma[k];
    }
    for (double& g : gamma) g /= sum;
    return gamma;
}

std::vector<int> soft_assign(std::span<const double> posteriors, double theta) {
    if (theta < 0.0 || theta > 1.0) throw UsageError("soft_assign: theta must lie in [0, 1]");
    if (posteriors.empty()) throw UsageError("soft_assign: empty posterior vector");
    std::vector<int> members;
    size_t argmax = 0;
    for (size_t k = 0; k < posteriors.size(); ++k) {
        if (posteriors[k] > posteriors[argmax]) argmax = k;
        if (posteriors[k] >= theta) members.push_back(static_cast<int>(k));
    }
    if (std::find(members.begin(), members.end(), static_cast<int>(argmax)) == members.end()) {
        members.push_back(static_cast<int>(argmax));
        std::sort(members.begin(), members.end());
    }
    return members;
}

nlohmann::json soft_assignment_to_json(const SoftAssignment& a) {
    return nlohmann::json{
        {"claim_id", a.claim_id}, {"posteriors", a.posteriors}, {"member_of", a.member_of}};
}

SoftAssignment soft_assignment_from_json(const nlohmann::json& j) {
    SoftAssignment a;
    a.claim_id = j.at("claim_id").get<std::string>();
    a.posteriors = j.at("posteriors").get<Vec>();
    a.member_of = j.at("member_of").get<std::vector<int>>();
    return a;
}

nlohmann::json gmm_model_to_json(const GmmModel& model, const PcaProjection& projection,
                                 double theta) {
    return nlohmann::json{{"num_components", model.num_components},
                          {"dim", model.dim},
                          {"weights", model.weights},
                          {"means", model.means},
                          {"variances", model.variances},
                          {"loglik_history", model.loglik_history},
                          {"seed", model.seed},
                          {"theta", theta},
                          {"projection",
                           {{"input_dim", projection.input_dim},
                            {"output_dim", projection.output_dim},
                            {"mean", projection.mean},
                            {"components", projection.components}}}};
}

void gmm_model_from_json(const nlohmann::json& j, GmmModel& model, PcaProjection& projection) {
    model.num_components = j.at("num_components").get<int>();
    model.dim = j.at("dim").get<int>();
    model.weights = j.at("weights").get<Vec>();
    model.means = j.at("means").get<std::vector<Vec>>();
    model.variances = j.at("variances").get<std::vector<Vec>>();
    model.loglik_history = j.at("loglik_history").get<std::vector<double>>();
    model.seed = j.at("seed").get<uint64_t>();
    const nlohmann::json& p = j.at("projection");
    projection.input_dim = p.at("input_dim").get<int>();
    projection.output_dim = p.at("output_dim").get<int>();
    projection.mean = p.at("mean").get<Vec>();
    projection.components = p.at("components").get<std::vector<Vec>>();
}

}  // namespace mhts

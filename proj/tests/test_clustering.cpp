#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mhts/clustering.hpp"
#include "mhts/errors.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace mhts;
using mhts::test::uniform01;

namespace {

std::vector<Vec> gaussian_blob(std::mt19937_64& rng, const Vec& center, double sigma, size_t n) {
    std::vector<Vec> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        Vec p(center.size());
        for (size_t j = 0; j < center.size(); ++j) {
            // Box-Muller
            double u1 = std::max(uniform01(rng), 1e-12);
            double u2 = uniform01(rng);
            p[j] = center[j] + sigma * std::sqrt(-2.0 * std::log(u1)) *
                                   std::cos(2.0 * M_PI * u2);
        }
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace

TEST_CASE("reduce_dims recovers an exact low-dimensional subspace") {
    std::mt19937_64 rng(11);
    // points on a 2-plane embedded in 5-space
    Vec b1{1, 0, 2, 0, -1}, b2{0, 3, 1, 1, 0};
    std::vector<Vec> points;
    for (int i = 0; i < 40; ++i) {
        double a = uniform01(rng) * 4 - 2, b = uniform01(rng) * 4 - 2;
        Vec p(5);
        for (int j = 0; j < 5; ++j) p[j] = a * b1[j] + b * b2[j];
        points.push_back(std::move(p));
    }
    PcaResult pca = reduce_dims(points, 2);
    REQUIRE(pca.projection.output_dim == 2);
    for (size_t i = 0; i < points.size(); ++i) {
        // reconstruct from the 2 retained components
        Vec rec = pca.projection.mean;
        for (int r = 0; r < 2; ++r) {
            for (int j = 0; j < 5; ++j) {
                rec[j] += pca.reduced[i][r] * pca.projection.components[r][j];
            }
        }
        for (int j = 0; j < 5; ++j) CHECK(rec[j] == doctest::Approx(points[i][j]).epsilon(1e-9));
    }
}

TEST_CASE("reduce_dims with d_prime = d preserves pairwise distances") {
    std::mt19937_64 rng(13);
    std::vector<Vec> points;
    for (int i = 0; i < 30; ++i) {
        Vec p(4);
        for (double& x : p) x = uniform01(rng);
        points.push_back(std::move(p));
    }
    PcaResult pca = reduce_dims(points, 4);
    REQUIRE(pca.projection.output_dim == 4);
    for (size_t a = 0; a < points.size(); ++a) {
        for (size_t b = a + 1; b < points.size(); ++b) {
            CHECK(euclidean_distance(pca.reduced[a], pca.reduced[b]) ==
                  doctest::Approx(euclidean_distance(points[a], points[b])).epsilon(1e-9));
        }
    }
}

TEST_CASE("projected variance equals the top eigenvalues of the sample covariance") {
    std::mt19937_64 rng(17);
    std::vector<Vec> points;
    for (int i = 0; i < 100; ++i) {
        Vec p(20);
        for (size_t j = 0; j < 20; ++j) p[j] = uniform01(rng) * (1.0 + 0.3 * j);
        points.push_back(std::move(p));
    }
    PcaResult pca = reduce_dims(points, 5);

    // library-side projected variance
    double projected = 0.0;
    for (int r = 0; r < 5; ++r) {
        double mean = 0.0, acc = 0.0;
        for (const Vec& z : pca.reduced) mean += z[r];
        mean /= static_cast<double>(pca.reduced.size());
        for (const Vec& z : pca.reduced) acc += (z[r] - mean) * (z[r] - mean);
        projected += acc / static_cast<double>(pca.reduced.size() - 1);
    }

    // oracle: eigendecompose the sample covariance independently
    auto eigvals = mhts::test::jacobi_eigenvalues(mhts::test::sample_covariance(points));
    double top5 = eigvals[0] + eigvals[1] + eigvals[2] + eigvals[3] + eigvals[4];
    CHECK(projected == doctest::Approx(top5).epsilon(1e-9));
}

TEST_CASE("reduce_dims shrinks on rank deficiency and validates input") {
    std::vector<Vec> two_points{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}};
    PcaResult pca = reduce_dims(two_points, 2);  // rank of 2 centered points is 1
    CHECK(pca.projection.output_dim == 1);

    CHECK_THROWS_AS(reduce_dims({{1.0, 2.0}}, 1), UsageError);
    CHECK_THROWS_AS(reduce_dims(two_points, 4), UsageError);
    CHECK_THROWS_AS(reduce_dims(two_points, 0), UsageError);
}

TEST_CASE("fit_gmm with K=1 reduces to the closed form") {
    std::mt19937_64 rng(19);
    std::vector<Vec> points;
    for (int i = 0; i < 200; ++i) {
        Vec p(3);
        for (double& x : p) x = uniform01(rng) * 2.0;
        points.push_back(std::move(p));
    }
    GmmModel model = fit_gmm(points, 1, 42);
    REQUIRE(model.num_components == 1);
    CHECK(model.weights[0] == doctest::Approx(1.0).epsilon(1e-12));

    Vec mean(3, 0.0), var(3, 0.0);
    for (const Vec& p : points)
        for (int j = 0; j < 3; ++j) mean[j] += p[j];
    for (double& m : mean) m /= points.size();
    for (const Vec& p : points)
        for (int j = 0; j < 3; ++j) var[j] += (p[j] - mean[j]) * (p[j] - mean[j]);
    for (double& v : var) v /= points.size();  // MLE variance

    for (int j = 0; j < 3; ++j) {
        CHECK(model.means[0][j] == doctest::Approx(mean[j]).epsilon(1e-9));
        CHECK(model.variances[0][j] == doctest::Approx(var[j]).epsilon(1e-9));
    }
}

TEST_CASE("fit_gmm separates two synthetic gaussians at 10 sigma") {
    // sample-mean noise is sigma * sqrt(d/n); n is sized so the 0.1 sigma
    // tolerance has a wide margin
    std::mt19937_64 rng(23);
    const double sigma = 0.5;
    Vec c1(2, 0.0), c2(2, 10.0 * sigma);
    auto points = gaussian_blob(rng, c1, sigma, 800);
    auto more = gaussian_blob(rng, c2, sigma, 800);
    points.insert(points.end(), more.begin(), more.end());

    GmmModel model = fit_gmm(points, 2, 7);
    auto err = [&](const Vec& m, const Vec& c) {
        double e = 0;
        for (size_t j = 0; j < m.size(); ++j) e += (m[j] - c[j]) * (m[j] - c[j]);
        return std::sqrt(e);
    };
    double worst = std::min(std::max(err(model.means[0], c1), err(model.means[1], c2)),
                            std::max(err(model.means[0], c2), err(model.means[1], c1)));
    CHECK(worst <= 0.1 * sigma);
}

TEST_CASE("EM log-likelihood history is non-decreasing") {
    std::mt19937_64 rng(29);
    auto points = gaussian_blob(rng, Vec{0, 0}, 1.0, 150);
    auto more = gaussian_blob(rng, Vec{3, 1}, 0.7, 100);
    points.insert(points.end(), more.begin(), more.end());
    GmmModel model = fit_gmm(points, 3, 5);
    REQUIRE(model.loglik_history.size() >= 2);
    for (size_t i = 1; i < model.loglik_history.size(); ++i) {
        CHECK(model.loglik_history[i] >= model.loglik_history[i - 1] - 1e-9);
    }
}

TEST_CASE("fit_gmm is deterministic for a fixed seed") {
    std::mt19937_64 rng(31);
    auto points = gaussian_blob(rng, Vec{0, 0, 0}, 1.0, 80);
    GmmModel a = fit_gmm(points, 3, 1234);
    GmmModel b = fit_gmm(points, 3, 1234);
    CHECK(a.weights == b.weights);
    CHECK(a.means == b.means);
    CHECK(a.variances == b.variances);
    CHECK(a.loglik_history == b.loglik_history);
}

TEST_CASE("select_k: one blob -> 1, three blobs -> 3, k_max=1 -> 1") {
    std::mt19937_64 rng(37);
    auto blob = gaussian_blob(rng, Vec{0, 0}, 1.0, 90);
    CHECK(select_k(blob, 5, 42) == 1);
    CHECK(select_k(blob, 1, 42) == 1);

    auto three = gaussian_blob(rng, Vec{0, 0}, 0.4, 60);
    auto b2 = gaussian_blob(rng, Vec{8, 0}, 0.4, 60);
    auto b3 = gaussian_blob(rng, Vec{0, 8}, 0.4, 60);
    three.insert(three.end(), b2.begin(), b2.end());
    three.insert(three.end(), b3.begin(), b3.end());
    int k = select_k(three, 6, 42);
    CHECK(k == 3);

    // oracle: the chosen K minimizes BIC over refits with the same seeds
    GmmOptions options;
    double chosen_bic = gmm_bic(fit_gmm(three, k, splitmix64(42 + k), options), three.size());
    for (int other = 1; other <= 6; ++other) {
        double bic =
            gmm_bic(fit_gmm(three, other, splitmix64(42 + other), options), three.size());
        CHECK(chosen_bic <= bic + 1e-9);
    }
}

TEST_CASE("posterior: trivial, symmetric, and hand-computed cases") {
    GmmModel one;
    one.num_components = 1;
    one.dim = 2;
    one.weights = {1.0};
    one.means = {{0.0, 0.0}};
    one.variances = {{1.0, 1.0}};
    CHECK(posterior(one, Vec{3.0, -1.0}) == Vec{1.0});

    GmmModel two;
    two.num_components = 2;
    two.dim = 1;
    two.weights = {0.5, 0.5};
    two.means = {{0.0}, {4.0}};
    two.variances = {{1.0}, {1.0}};
    Vec mid = posterior(two, Vec{2.0});
    CHECK(mid[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(mid[1] == doctest::Approx(0.5).epsilon(1e-9));

    // direct density-ratio oracle at x = 1
    Vec at_one = posterior(two, Vec{1.0});
    double n0 = std::exp(-0.5 * 1.0) / std::sqrt(2 * M_PI);
    double n1 = std::exp(-0.5 * 9.0) / std::sqrt(2 * M_PI);
    double expected = 0.5 * n0 / (0.5 * n0 + 0.5 * n1);
    CHECK(at_one[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(at_one[1] == doctest::Approx(1.0 - expected).epsilon(1e-12));
}

TEST_CASE("posterior matches a brute-force direct-density implementation") {
    std::mt19937_64 rng(41);
    const int K = 10, d = 6;
    GmmModel model;
    model.num_components = K;
    model.dim = d;
    double wsum = 0;
    for (int k = 0; k < K; ++k) {
        model.weights.push_back(0.2 + uniform01(rng));
        wsum += model.weights.back();
        Vec mean(d), var(d);
        for (int j = 0; j < d; ++j) {
            mean[j] = uniform01(rng) * 6 - 3;
            var[j] = 0.2 + uniform01(rng);
        }
        model.means.push_back(mean);
        model.variances.push_back(var);
    }
    for (double& w : model.weights) w /= wsum;

    for (int trial = 0; trial < 1000; ++trial) {
        Vec x(d);
        for (double& v : x) v = uniform01(rng) * 8 - 4;
        Vec gamma = posterior(model, x);

        // direct densities without log-space
        Vec direct(K);
        double total = 0;
        for (int k = 0; k < K; ++k) {
            double dens = 1.0;
            for (int j = 0; j < d; ++j) {
                double diff = x[j] - model.means[k][j];
                dens *= std::exp(-0.5 * diff * diff / model.variances[k][j]) /
                        std::sqrt(2 * M_PI * model.variances[k][j]);
            }
            direct[k] = model.weights[k] * dens;
            total += direct[k];
        }
        double sum = 0;
        for (int k = 0; k < K; ++k) {
            CHECK(gamma[k] == doctest::Approx(direct[k] / total).epsilon(1e-9));
            sum += gamma[k];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("posterior is invariant under consistent component permutation") {
    GmmModel m;
    m.num_components = 3;
    m.dim = 2;
    m.weights = {0.2, 0.5, 0.3};
    m.means = {{0, 0}, {2, 1}, {-1, 3}};
    m.variances = {{1, 0.5}, {0.3, 0.8}, {2, 1}};
    Vec x{0.7, 0.9};
    Vec g = posterior(m, x);

    GmmModel p = m;  // rotate components by one
    for (int k = 0; k < 3; ++k) {
        p.weights[k] = m.weights[(k + 1) % 3];
        p.means[k] = m.means[(k + 1) % 3];
        p.variances[k] = m.variances[(k + 1) % 3];
    }
    Vec gp = posterior(p, x);
    for (int k = 0; k < 3; ++k) CHECK(gp[k] == doctest::Approx(g[(k + 1) % 3]).epsilon(1e-12));
}

TEST_CASE("soft_assign threshold and argmax fallback") {
    CHECK(soft_assign(Vec{0.6, 0.4}, 0.3) == std::vector<int>{0, 1});
    CHECK(soft_assign(Vec{0.6, 0.4}, 0.5) == std::vector<int>{0});
    CHECK(soft_assign(Vec{0.6, 0.4}, 0.9) == std::vector<int>{0});
    CHECK(soft_assign(Vec{0.5, 0.5}, 0.9) == std::vector<int>{0});  // tie -> lowest index
    CHECK(soft_assign(Vec{0.1, 0.8, 0.1}, 0.05) == std::vector<int>{0, 1, 2});
    CHECK_THROWS_AS(soft_assign(Vec{0.5, 0.5}, 1.5), UsageError);
    CHECK_THROWS_AS(soft_assign(Vec{}, 0.5), UsageError);
}

TEST_CASE("fit_gmm validates inputs and floors variances") {
    std::vector<Vec> points{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(fit_gmm(points, 0, 1), UsageError);
    CHECK_THROWS_AS(fit_gmm(points, 4, 1), UsageError);

    GmmOptions options;
    options.var_floor = 1e-4;
    GmmModel model = fit_gmm(points, 1, 1, options);  // identical points: floor kicks in
    for (double v : model.variances[0]) CHECK(v >= 1e-4);
}

TEST_CASE("gmm model json round-trip preserves re-scoring") {
    std::mt19937_64 rng(43);
    auto points = gaussian_blob(rng, Vec{0, 0, 0}, 1.0, 60);
    PcaResult pca = reduce_dims(points, 2);
    GmmModel model = fit_gmm(pca.reduced, 2, 99);

    nlohmann::json j = gmm_model_to_json(model, pca.projection, 0.1);
    GmmModel back;
    PcaProjection proj;
    gmm_model_from_json(j, back, proj);

    Vec probe = points[10];
    Vec z1 = pca.projection.apply(probe);
    Vec z2 = proj.apply(probe);
    CHECK(z1 == z2);
    CHECK(posterior(model, z1) == posterior(back, z2));
}

TEST_CASE("persistent component collapse is repaired thrice, then errors") {
    // two exact point masses cannot hold a third component: every repair
    // re-seeds it onto an already-claimed point and it empties again
    std::vector<Vec> points;
    for (int i = 0; i < 40; ++i) points.push_back(Vec{0.0, 0.0});
    for (int i = 0; i < 40; ++i) points.push_back(Vec{1000.0, 1000.0});
    GmmOptions options;
    options.n_init = 1;
    CHECK_THROWS_WITH_AS(fit_gmm(points, 3, 0, options), doctest::Contains("collapse"),
                         StageError);

    // with a genuine third group the same shape fits cleanly
    for (int i = 0; i < 8; ++i) points.push_back(Vec{500.0 + i, -500.0 - i});
    GmmModel model = fit_gmm(points, 3, 0, options);
    for (double w : model.weights) CHECK(w > 0.0);
    for (size_t i = 1; i < model.loglik_history.size(); ++i) {
        CHECK(model.loglik_history[i] >= model.loglik_history[i - 1] - 1e-9);
    }
}

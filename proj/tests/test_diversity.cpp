#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mhts/diversity.hpp"
#include "mhts/errors.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using namespace mhts;
using mhts::test::TempDir;
using mhts::test::uniform01;

namespace {

std::vector<Vec> random_vectors(std::mt19937_64& rng, size_t n, size_t d) {
    std::vector<Vec> out;
    for (size_t i = 0; i < n; ++i) {
        Vec v(d);
        for (double& x : v) x = uniform01(rng) * 2 - 1;
        out.push_back(std::move(v));
    }
    return out;
}

// plane rotation applied to all vectors: distances and trace must not move
std::vector<Vec> rotate_all(const std::vector<Vec>& vectors, size_t a, size_t b, double angle) {
    std::vector<Vec> out = vectors;
    double c = std::cos(angle), s = std::sin(angle);
    for (Vec& v : out) {
        double va = v[a], vb = v[b];
        v[a] = c * va - s * vb;
        v[b] = s * va + c * vb;
    }
    return out;
}

}  // namespace

TEST_CASE("identical points give zero distance and zero variance") {
    std::vector<Vec> same(5, Vec{0.3, -0.7, 0.1});
    CHECK(avg_pairwise_distance(same, DistanceMetric::euclidean) == 0.0);
    CHECK(avg_pairwise_distance(same, DistanceMetric::cosine_distance) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eigen_variance_sum(same) == 0.0);
}

TEST_CASE("two orthogonal unit vectors: euclidean distance sqrt(2)") {
    std::vector<Vec> pair{{1.0, 0.0}, {0.0, 1.0}};
    CHECK(avg_pairwise_distance(pair, DistanceMetric::euclidean) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(avg_pairwise_distance(pair, DistanceMetric::cosine_distance) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hand-computed variance sum for two 2-d points") {
    std::vector<Vec> points{{0.0, 0.0}, {2.0, 0.0}};
    // sample variances: (2, 0)
    CHECK(eigen_variance_sum(points) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("avg pairwise distance matches the double-loop oracle on random vectors") {
    std::mt19937_64 rng(71);
    auto vectors = random_vectors(rng, 50, 6);
    double got = avg_pairwise_distance(vectors, DistanceMetric::euclidean);

    double total = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < vectors.size(); ++i) {
        for (size_t j = i + 1; j < vectors.size(); ++j) {
            double acc = 0;
            for (size_t t = 0; t < 6; ++t) {
                acc += (vectors[i][t] - vectors[j][t]) * (vectors[i][t] - vectors[j][t]);
            }
            total += std::sqrt(acc);
            ++pairs;
        }
    }
    CHECK(pairs == 50 * 49 / 2);
    CHECK(got == doctest::Approx(total / pairs).epsilon(1e-9));
}

TEST_CASE("eigen variance sum equals the eigenvalue sum from an independent solver") {
    std::mt19937_64 rng(73);
    auto vectors = random_vectors(rng, 100, 8);
    double trace_based = eigen_variance_sum(vectors);
    auto eigvals = mhts::test::jacobi_eigenvalues(mhts::test::sample_covariance(vectors));
    double eig_sum = 0;
    for (double v : eigvals) eig_sum += v;
    CHECK(trace_based == doctest::Approx(eig_sum).epsilon(1e-9));
}

TEST_CASE("both metrics are invariant under permutation and rotation") {
    std::mt19937_64 rng(79);
    auto vectors = random_vectors(rng, 40, 5);
    double d0 = avg_pairwise_distance(vectors, DistanceMetric::euclidean);
    double v0 = eigen_variance_sum(vectors);

    auto shuffled = vectors;
    for (size_t i = 0; i < shuffled.size(); ++i) {
        std::swap(shuffled[i], shuffled[rng() % shuffled.size()]);
    }
    CHECK(avg_pairwise_distance(shuffled, DistanceMetric::euclidean) ==
          doctest::Approx(d0).epsilon(1e-12));
    CHECK(eigen_variance_sum(shuffled) == doctest::Approx(v0).epsilon(1e-12));

    auto rotated = rotate_all(rotate_all(vectors, 0, 3, 0.7), 1, 4, -1.2);
    CHECK(avg_pairwise_distance(rotated, DistanceMetric::euclidean) ==
          doctest::Approx(d0).epsilon(1e-9));
    CHECK(eigen_variance_sum(rotated) == doctest::Approx(v0).epsilon(1e-9));
}

TEST_CASE("duplication that adds no spread never increases the variance sum") {
    // duplicating an arbitrary vector CAN increase the sample variance (a
    // repeated outlier gains weight), so the guarantees are narrower: the
    // point closest to the mean, or a copy of the whole set, add no spread
    std::mt19937_64 rng(83);
    for (int round = 0; round < 20; ++round) {
        auto vectors = random_vectors(rng, 5 + rng() % 20, 4);
        double before = eigen_variance_sum(vectors);

        // (a) duplicate the vector nearest the mean
        Vec mean(4, 0.0);
        for (const Vec& v : vectors)
            for (int j = 0; j < 4; ++j) mean[j] += v[j];
        for (double& m : mean) m /= static_cast<double>(vectors.size());
        size_t nearest = 0;
        double best = 1e300;
        for (size_t i = 0; i < vectors.size(); ++i) {
            double d = euclidean_distance(vectors[i], mean);
            if (d < best) {
                best = d;
                nearest = i;
            }
        }
        auto with_center = vectors;
        with_center.push_back(vectors[nearest]);
        CHECK(eigen_variance_sum(with_center) <= before + 1e-12);

        // (b) duplicate the entire set
        auto doubled = vectors;
        doubled.insert(doubled.end(), vectors.begin(), vectors.end());
        CHECK(eigen_variance_sum(doubled) <= before + 1e-12);
    }
}

TEST_CASE("minimum input sizes are enforced") {
    CHECK_THROWS_AS(avg_pairwise_distance({{1.0, 0.0}}, DistanceMetric::euclidean), UsageError);
    CHECK_THROWS_AS(eigen_variance_sum({{1.0, 0.0}}), UsageError);
}

TEST_CASE("compare_sets: identical inputs, count matching, flags") {
    std::mt19937_64 rng(89);
    auto a = random_vectors(rng, 30, 4);
    DiversityOptions options;
    options.normalize = false;

    auto [ra, rb] = compare_sets(a, a, "left", "right", options);
    CHECK(ra.n == rb.n);
    CHECK(ra.avg_pairwise_distance == doctest::Approx(rb.avg_pairwise_distance).epsilon(1e-12));
    CHECK(ra.eigen_variance_sum == doctest::Approx(rb.eigen_variance_sum).epsilon(1e-12));
    CHECK_FALSE(ra.subsampled);
    CHECK_FALSE(rb.subsampled);

    auto big = random_vectors(rng, 200, 4);
    auto small = random_vectors(rng, 100, 4);
    auto [rbig, rsmall] = compare_sets(big, small, "big", "small", options);
    CHECK(rbig.n == 100);
    CHECK(rsmall.n == 100);
    CHECK(rbig.subsampled);
    CHECK_FALSE(rsmall.subsampled);

    CHECK_THROWS_AS(compare_sets({}, small, "a", "b", options), UsageError);
}

TEST_CASE("embedding export round-trips bit-exactly and rejects duplicate ids") {
    TempDir dir;
    std::mt19937_64 rng(97);
    std::vector<LabeledEmbedding> items;
    for (int i = 0; i < 3; ++i) {
        LabeledEmbedding item;
        item.label = "question";
        item.id = "q" + std::to_string(i);
        for (int j = 0; j < 7; ++j) item.vector.push_back(uniform01(rng) * 2 - 1);
        items.push_back(std::move(item));
    }
    std::string path = dir.str() + "/emb.jsonl";
    export_embeddings(items, path);
    auto back = import_embeddings(path);
    REQUIRE(back.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(back[i].label == items[i].label);
        CHECK(back[i].id == items[i].id);
        CHECK(back[i].vector == items[i].vector);  // bit-exact through JSON
    }

    items.push_back(items[0]);
    CHECK_THROWS_WITH_AS(export_embeddings(items, dir.str() + "/dup.jsonl"),
                         doctest::Contains("duplicate id"), UsageError);
}

#pragma once

// Independent reference implementations used only to check the library.
// Deliberately simple and separate from the code under test.

#include <algorithm>
#include <cmath>
#include <vector>

namespace mhts::test {

// Classic cyclic Jacobi, eigenvalues only, descending. O(n^3) per sweep.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
    const size_t n = a.size();
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-26) break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double phi = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                double c = std::cos(phi), s = std::sin(phi);
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
            }
        }
    }
    std::vector<double> vals(n);
    for (size_t i = 0; i < n; ++i) vals[i] = a[i][i];
    std::sort(vals.rbegin(), vals.rend());
    return vals;
}

inline std::vector<std::vector<double>> sample_covariance(
    const std::vector<std::vector<double>>& x) {
    const size_t n = x.size(), d = x[0].size();
    std::vector<double> mean(d, 0.0);
    for (const auto& v : x)
        for (size_t j = 0; j < d; ++j) mean[j] += v[j];
    for (double& m : mean) m /= static_cast<double>(n);
    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (const auto& v : x) {
        for (size_t a = 0; a < d; ++a)
            for (size_t b = 0; b < d; ++b) cov[a][b] += (v[a] - mean[a]) * (v[b] - mean[b]);
    }
    for (auto& row : cov)
        for (double& c : row) c /= static_cast<double>(n - 1);
    return cov;
}

// Textbook Pearson, direct formula.
inline double pearson_direct(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
    }
    return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace mhts::test

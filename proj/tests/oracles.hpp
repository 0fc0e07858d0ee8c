#ifndef GNNLAB_TESTS_ORACLES_HPP
#define GNNLAB_TESTS_ORACLES_HPP

// Independent reference implementations used only by the tests. None of
// them calls into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <utility>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(Dense a, int sweeps = 100) {
    const std::size_t n = a.size();
    for (int s = 0; s < sweeps; ++s) {
        double off = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    return ev;
}

/// Largest singular value as sqrt of the top eigenvalue of M^T M.
inline double spectral_norm(const Dense& m) {
    const std::size_t r = m.size(), c = m.empty() ? 0 : m[0].size();
    Dense g(c, std::vector<double>(c, 0.0));
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j)
            for (std::size_t k = 0; k < r; ++k) g[i][j] += m[k][i] * m[k][j];
    const auto ev = jacobi_eigenvalues(g);
    return std::sqrt(std::max(0.0, *std::max_element(ev.begin(), ev.end())));
}

/// Exact rank of an integer matrix by fraction-free (Bareiss) elimination.
inline int bareiss_rank(std::vector<std::vector<std::int64_t>> in) {
    const std::size_t rows = in.size(), cols = in.empty() ? 0 : in[0].size();
    std::vector<std::vector<__int128>> a(rows, std::vector<__int128>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) a[i][j] = in[i][j];
    __int128 prev = 1;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t pivot = rank;
        while (pivot < rows && a[pivot][col] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(a[pivot], a[rank]);
        for (std::size_t i = rank + 1; i < rows; ++i) {
            for (std::size_t j = col + 1; j < cols; ++j)
                a[i][j] = (a[rank][col] * a[i][j] - a[i][col] * a[rank][j]) / prev;
            a[i][col] = 0;
        }
        prev = a[rank][col];
        ++rank;
    }
    return static_cast<int>(rank);
}

/// E|sum of n three-point signs| by plain Monte Carlo on a private LCG.
struct McResult {
    double mean = 0;
    double standard_error = 0;
};

inline McResult abs_sign_sum_mc(std::size_t n, double p, std::size_t draws, std::uint64_t seed) {
    std::uint64_t state = seed * 6364136223846793005ULL + 1442695040888963407ULL;
    auto next = [&state] {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    double sum = 0, sum2 = 0;
    for (std::size_t t = 0; t < draws; ++t) {
        long long s = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = next();
            if (u < p) ++s;
            else if (u < 2 * p) --s;
        }
        const double v = static_cast<double>(std::llabs(s));
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / static_cast<double>(draws);
    const double var = std::max(0.0, sum2 / static_cast<double>(draws) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(draws))};
}

} // namespace oracle

#endif // GNNLAB_TESTS_ORACLES_HPP

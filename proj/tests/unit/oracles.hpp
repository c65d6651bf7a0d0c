#pragma once

// Brute-force reference implementations used by the tests. Deliberately
// naive: direct sums, full enumeration, no shared code with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

inline Eigen::MatrixXd equicorrelated(std::size_t n, double c) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), c);
    m.diagonal().setOnes();
    return m;
}

inline Eigen::MatrixXd block_matrix(const std::vector<std::size_t>& sizes, double intra, double inter) {
    const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    std::vector<std::size_t> block;
    for (std::size_t b = 0; b < sizes.size(); ++b) block.insert(block.end(), sizes[b], b);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                i == j ? 1.0 : (block[i] == block[j] ? intra : inter);
    return m;
}

// Symmetric, unit diagonal, off-diagonal uniform on [-1, 1].
inline Eigen::MatrixXd random_symmetric(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) m(i, j) = m(j, i) = u(rng);
    return m;
}

inline double seriation_cost(const Eigen::MatrixXd& m, const std::vector<std::size_t>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j)
            s += m(static_cast<Eigen::Index>(p[i]), static_cast<Eigen::Index>(p[j])) *
                 std::abs(static_cast<double>(i) - static_cast<double>(j));
    return s;
}

inline double min_seriation_cost(const Eigen::MatrixXd& m) {
    std::vector<std::size_t> p(static_cast<std::size_t>(m.rows()));
    std::iota(p.begin(), p.end(), 0);
    double best = INFINITY;
    do best = std::min(best, seriation_cost(m, p));
    while (std::next_permutation(p.begin(), p.end()));
    return best;
}

inline double mean_offdiag(const Eigen::MatrixXd& m) {
    double s = 0.0;
    double k = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j) {
                s += m(i, j);
                k += 1.0;
            }
    return s / k;
}

struct Segmentation {
    double score = -INFINITY;
    std::vector<std::size_t> starts;
};

// Score of explicit block starts on a matrix that is already in order.
inline double segmentation_score(const Eigen::MatrixXd& m, const std::vector<std::size_t>& starts, double gamma) {
    const double mean = mean_offdiag(m);
    const auto n = static_cast<std::size_t>(m.rows());
    double total = 0.0;
    for (std::size_t b = 0; b < starts.size(); ++b) {
        const std::size_t lo = starts[b];
        const std::size_t hi = b + 1 < starts.size() ? starts[b + 1] : n;
        double inside = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            for (std::size_t j = lo; j < hi; ++j)
                if (i != j) inside += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const double size = static_cast<double>(hi - lo);
        total += inside - gamma * mean * size * (size - 1.0);
    }
    return total;
}

// All 2^(n-1) contiguous segmentations.
inline std::vector<Segmentation> all_segmentations(const Eigen::MatrixXd& m, double gamma) {
    const auto n = static_cast<std::size_t>(m.rows());
    std::vector<Segmentation> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
        Segmentation s;
        s.starts.push_back(0);
        for (std::size_t c = 1; c < n; ++c)
            if (mask & (std::uint64_t{1} << (c - 1))) s.starts.push_back(c);
        s.score = segmentation_score(m, s.starts, gamma);
        out.push_back(std::move(s));
    }
    return out;
}

inline Segmentation best_segmentation(const Eigen::MatrixXd& m, double gamma) {
    Segmentation best;
    for (auto& s : all_segmentations(m, gamma))
        if (s.score > best.score) best = s;
    return best;
}

// Pair-counting definition of the adjusted Rand index.
inline double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    double both = 0, in_a = 0, in_b = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool sa = a[i] == a[j], sb = b[i] == b[j];
            both += sa && sb;
            in_a += sa;
            in_b += sb;
            pairs += 1;
        }
    const double expected = in_a * in_b / pairs;
    const double max_index = 0.5 * (in_a + in_b);
    if (max_index == expected) return 1.0;
    return (both - expected) / (max_index - expected);
}

}  // namespace oracle

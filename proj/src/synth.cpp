#include "corrstruct/synth.hpp"

#include "corrstruct/error.hpp"
#include "corrstruct/seriation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace corrstruct {

Eigen::MatrixXd standard_normal_matrix(std::size_t t, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = normal(rng);
    }
    return z;
}

Eigen::MatrixXd generate_noise_panel(std::size_t t, std::size_t n, std::uint64_t seed) {
    if (n < 2 || t < n) throw InputError("noise panel needs t >= n >= 2");
    return standardize_columns(standard_normal_matrix(t, n, seed));
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& target) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(target);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed on target matrix");
    if (solver.eigenvalues().minCoeff() < -1e-10) {
        throw InputError("target correlation matrix is not positive semidefinite");
    }
    const Eigen::VectorXd root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

std::size_t BlockModelSpec::n() const {
    return std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0});
}

std::vector<int> BlockModelSpec::labels() const {
    std::vector<int> out;
    for (std::size_t b = 0; b < block_sizes.size(); ++b) {
        out.insert(out.end(), block_sizes[b], static_cast<int>(b + 1));
    }
    return out;
}

Eigen::MatrixXd BlockModelSpec::target() const {
    const std::size_t k = block_sizes.size();
    if (k == 0) throw InputError("block model needs at least one block");
    if (intra.size() != k) throw InputError("block model needs one intra correlation per block");
    if (k > 1 && (inter.rows() != static_cast<Eigen::Index>(k) || inter.cols() != inter.rows())) {
        throw InputError("block model inter matrix must be K x K");
    }
    for (auto s : block_sizes) {
        if (s < 1) throw InputError("block sizes must be >= 1");
    }
    const auto lab = labels();
    const auto n = static_cast<Eigen::Index>(lab.size());
    Eigen::MatrixXd c(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto a = static_cast<std::size_t>(lab[static_cast<std::size_t>(i)] - 1);
            const auto b = static_cast<std::size_t>(lab[static_cast<std::size_t>(j)] - 1);
            if (i == j) {
                c(i, j) = 1.0;
            } else if (a == b) {
                c(i, j) = intra[a];
            } else {
                c(i, j) = inter(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
        }
    }
    return c;
}

BlockModelSpec two_level_block_spec(std::vector<std::size_t> block_sizes, double intra,
                                    std::span<const std::size_t> high_group, double high,
                                    double low, std::size_t t, std::uint64_t seed) {
    BlockModelSpec spec;
    const std::size_t k = block_sizes.size();
    spec.block_sizes = std::move(block_sizes);
    spec.intra.assign(k, intra);
    spec.inter = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), low);
    for (auto a : high_group) {
        for (auto b : high_group) {
            if (a >= k || b >= k) throw InputError("high group block index out of range");
            spec.inter(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = high;
        }
    }
    spec.t = t;
    spec.seed = seed;
    return spec;
}

BlockModelSpec paper71_spec(std::uint64_t seed) {
    const std::size_t group[] = {2, 3, 4};
    return two_level_block_spec({8, 7, 13, 5, 31, 7}, 0.9, group, 0.35, 0.25, 5272, seed);
}

BlockPanel generate_block_panel(const BlockModelSpec& spec) {
    const Eigen::MatrixXd target = spec.target();
    const Eigen::MatrixXd root = symmetric_sqrt(target);
    BlockPanel out;
    out.returns = standard_normal_matrix(spec.t, spec.n(), spec.seed) * root;
    out.labels = spec.labels();
    return out;
}

DuplicatePairPanel generate_duplicate_pair_panel(const DuplicatePairSpec& spec) {
    const std::size_t pairs = spec.pair_correlations.size();
    if (spec.n < 2 * pairs || spec.n < 2) throw InputError("not enough series for the planted pairs");
    for (double rho : spec.pair_correlations) {
        if (!(rho > 0.9 && rho < 1.0)) throw InputError("pair correlation must lie in (0.9, 1)");
    }

    std::mt19937_64 rng(derive_seed(spec.seed, 0x9a17));
    std::vector<std::size_t> idx(spec.n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);

    const auto n = static_cast<Eigen::Index>(spec.n);
    Eigen::MatrixXd target = Eigen::MatrixXd::Constant(n, n, spec.background);
    target.diagonal().setOnes();
    DuplicatePairPanel out;
    for (std::size_t p = 0; p < pairs; ++p) {
        const std::size_t a = std::min(idx[2 * p], idx[2 * p + 1]);
        const std::size_t b = std::max(idx[2 * p], idx[2 * p + 1]);
        const double rho = spec.pair_correlations[p];
        target(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = rho;
        target(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = rho;
        out.pairs.push_back({a, b, rho});
    }
    out.returns = standard_normal_matrix(spec.t, spec.n, spec.seed) * symmetric_sqrt(target);
    return out;
}

DuplicatePairPanel generate_duplicate_pair_panel(std::size_t n, std::size_t t, double pair_corr,
                                                 std::uint64_t seed) {
    DuplicatePairSpec spec;
    spec.n = n;
    spec.t = t;
    spec.pair_correlations = {pair_corr};
    spec.seed = seed;
    return generate_duplicate_pair_panel(spec);
}

Eigen::MatrixXd generate_factor_panel(const FactorModelSpec& spec) {
    if (spec.betas.size() != spec.n) throw InputError("factor model needs one beta per series");
    if (!(spec.idio_sigma > 0.0)) throw InputError("idiosyncratic sigma must be positive");
    for (double b : spec.betas) {
        if (!std::isfinite(b)) throw InputError("betas must be finite");
    }
    if (!spec.factor_drift.empty() && spec.factor_drift.size() != spec.t) {
        throw InputError("factor drift must have one entry per time step");
    }
    const auto t = static_cast<Eigen::Index>(spec.t);
    // Factor and idiosyncratic draws come from separate streams so the factor
    // path does not depend on N.
    Eigen::VectorXd f = standard_normal_matrix(spec.t, 1, derive_seed(spec.seed, 1)).col(0) * spec.scale;
    if (!spec.factor_drift.empty()) {
        f += Eigen::Map<const Eigen::VectorXd>(spec.factor_drift.data(), t);
    }
    const Eigen::MatrixXd eps = standard_normal_matrix(spec.t, spec.n, derive_seed(spec.seed, 2));
    const Eigen::Map<const Eigen::VectorXd> beta(spec.betas.data(), static_cast<Eigen::Index>(spec.n));
    return f * beta.transpose() + eps * (spec.scale * spec.idio_sigma);
}

double factor_mean_correlation(std::span<const double> betas, double idio_sigma) {
    const std::size_t n = betas.size();
    if (n < 2) throw InputError("need at least 2 betas");
    const double s2 = idio_sigma * idio_sigma;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            sum += betas[i] * betas[j] /
                   std::sqrt((betas[i] * betas[i] + s2) * (betas[j] * betas[j] + s2));
        }
    }
    return sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

double calibrate_idio_sigma(std::span<const double> betas, double target_mean_corr) {
    if (!(target_mean_corr > 0.0)) throw InputError("target correlation must be positive");
    // Mean correlation decreases monotonically in sigma.
    double lo = 1e-8, hi = 1.0;
    while (factor_mean_correlation(betas, hi) > target_mean_corr) {
        hi *= 2.0;
        if (hi > 1e8) throw InputError("target correlation is unreachable");
    }
    if (factor_mean_correlation(betas, lo) < target_mean_corr) {
        throw InputError("target correlation is unreachable for these betas");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (factor_mean_correlation(betas, mid) > target_mean_corr ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

FactorModelSpec calibrated_factor_spec(std::size_t n, std::size_t t, double target_mean_corr,
                                       std::uint64_t seed) {
    FactorModelSpec spec;
    spec.n = n;
    spec.t = t;
    spec.seed = seed;
    std::mt19937_64 rng(derive_seed(seed, 3));
    for (std::size_t i = 0; i < n; ++i) {
        spec.betas.push_back(0.8 + 0.4 * static_cast<double>(rng() >> 11) * 0x1.0p-53);
    }
    spec.idio_sigma = calibrate_idio_sigma(spec.betas, target_mean_corr);
    return spec;
}

std::vector<double> bubble_drift(std::size_t t, double peak_fraction, double rise, double fall) {
    if (!(peak_fraction > 0.0 && peak_fraction < 1.0)) {
        throw InputError("peak fraction must lie in (0, 1)");
    }
    const auto peak = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::round(peak_fraction * static_cast<double>(t))));
    std::vector<double> drift(t, 0.0);
    for (std::size_t s = 0; s < t; ++s) {
        drift[s] = s < peak ? rise / static_cast<double>(peak)
                            : -fall / static_cast<double>(std::max<std::size_t>(1, t - peak));
    }
    return drift;
}

Eigen::MatrixXd random_correlation_matrix(std::size_t n, std::uint64_t seed) {
    if (n < 2) throw InputError("random correlation matrix needs n >= 2");
    const Eigen::MatrixXd a = standard_normal_matrix(n, n + 2, seed);
    Eigen::MatrixXd cov = a * a.transpose();
    const Eigen::VectorXd inv = cov.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd c = inv.asDiagonal() * cov * inv.asDiagonal();
    c = 0.5 * (c + c.transpose());
    c.diagonal().setOnes();
    return c;
}

PricePanel prices_from_returns(const Eigen::MatrixXd& returns, std::vector<std::string> labels,
                               Date start, double initial) {
    if (labels.empty()) labels = default_labels(static_cast<std::size_t>(returns.cols()));
    if (labels.size() != static_cast<std::size_t>(returns.cols())) {
        throw InputError("label count does not match return columns");
    }
    PricePanel panel;
    panel.labels = std::move(labels);
    panel.prices.resize(returns.rows() + 1, returns.cols());
    panel.prices.row(0).setConstant(initial);
    for (Eigen::Index t = 0; t < returns.rows(); ++t) {
        panel.prices.row(t + 1) = (panel.prices.row(t).array() * returns.row(t).array().exp()).matrix();
    }
    for (Eigen::Index t = 0; t <= returns.rows(); ++t) panel.dates.push_back(start + static_cast<int>(t));
    return panel;
}

}  // namespace corrstruct

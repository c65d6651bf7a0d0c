#pragma once

// Synthetic return panels with known structure: pure noise, planted block
// correlations, near-duplicate pairs and one-factor markets. All generators
// are deterministic per seed.

#include "corrstruct/date.hpp"
#include "corrstruct/ingest.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace corrstruct {

/// i.i.d. standard normal T x N matrix, columnwise standardized.
Eigen::MatrixXd generate_noise_panel(std::size_t t, std::size_t n, std::uint64_t seed);

/// T x N i.i.d. standard normal draws (not standardized).
Eigen::MatrixXd standard_normal_matrix(std::size_t t, std::size_t n, std::uint64_t seed);

/// Symmetric square root U sqrt(L) U^T. Throws InputError when the matrix has
/// an eigenvalue below -1e-10.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& target);

struct BlockModelSpec {
    std::vector<std::size_t> block_sizes;
    std::vector<double> intra;  ///< per block
    Eigen::MatrixXd inter;      ///< K x K, diagonal ignored
    std::size_t t = 5000;
    std::uint64_t seed = 0;

    std::size_t n() const;
    /// Ground-truth cluster of each series, 1..K.
    std::vector<int> labels() const;
    /// Implied correlation matrix with unit diagonal.
    Eigen::MatrixXd target() const;
};

/// Blocks whose members in `high_group` (0-based block indices) correlate at
/// `high` across blocks; every other cross-block pair at `low`.
BlockModelSpec two_level_block_spec(std::vector<std::size_t> block_sizes, double intra,
                                    std::span<const std::size_t> high_group, double high,
                                    double low, std::size_t t, std::uint64_t seed);

/// N = 71 in blocks of (8, 7, 13, 5, 31, 7), T = 5272, intra 0.9, 0.35
/// among blocks 3/4/5 and 0.25 elsewhere.
BlockModelSpec paper71_spec(std::uint64_t seed);

struct BlockPanel {
    Eigen::MatrixXd returns;
    std::vector<int> labels;
};

/// Multivariate normal sample with the spec's target correlation.
BlockPanel generate_block_panel(const BlockModelSpec& spec);

struct PlantedPair {
    std::size_t first;
    std::size_t second;
    double correlation;
};

struct DuplicatePairSpec {
    std::size_t n = 71;
    std::size_t t = 5272;
    std::vector<double> pair_correlations{0.999};  ///< one planted pair per entry, each in (0.9, 1)
    double background = 0.3;  ///< correlation between every other pair
    std::uint64_t seed = 0;
};

struct DuplicatePairPanel {
    Eigen::MatrixXd returns;
    std::vector<PlantedPair> pairs;  ///< series chosen at random, first < second
};

DuplicatePairPanel generate_duplicate_pair_panel(const DuplicatePairSpec& spec);
DuplicatePairPanel generate_duplicate_pair_panel(std::size_t n, std::size_t t, double pair_corr,
                                                 std::uint64_t seed);

/// r_i(t) = beta_i (scale f(t) + drift(t)) + scale idio_sigma eps_i(t).
struct FactorModelSpec {
    std::size_t n = 71;
    std::size_t t = 5272;
    std::vector<double> betas;
    double idio_sigma = 1.0;
    std::uint64_t seed = 0;
    double scale = 1.0;
    std::vector<double> factor_drift;  ///< empty or length t
};

Eigen::MatrixXd generate_factor_panel(const FactorModelSpec& spec);

/// Population mean pairwise correlation of the one-factor model.
double factor_mean_correlation(std::span<const double> betas, double idio_sigma);

/// Idiosyncratic volatility giving the requested mean pairwise correlation.
double calibrate_idio_sigma(std::span<const double> betas, double target_mean_corr);

/// Betas uniform on [0.8, 1.2], idio_sigma calibrated to target_mean_corr.
FactorModelSpec calibrated_factor_spec(std::size_t n, std::size_t t, double target_mean_corr,
                                       std::uint64_t seed);

/// Per-step drift that rises linearly in total by `rise` (log units) until
/// peak_fraction of the sample and then falls back by `fall`.
std::vector<double> bubble_drift(std::size_t t, double peak_fraction, double rise, double fall);

/// Sample correlation matrix of a random loading model; entries spread over
/// both signs. Used for randomized seriation checks.
Eigen::MatrixXd random_correlation_matrix(std::size_t n, std::uint64_t seed);

/// Prices P_i(t) = initial * exp(cumulative returns), one row more than the
/// returns, on consecutive calendar days from `start`.
PricePanel prices_from_returns(const Eigen::MatrixXd& returns, std::vector<std::string> labels,
                               Date start, double initial = 20.0);

}  // namespace corrstruct

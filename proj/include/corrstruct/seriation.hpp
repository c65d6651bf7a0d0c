#pragma once

// Matrix seriation by simulated annealing, exact contiguous block
// segmentation of the seriated order, and consensus clustering over repeated
// stochastic runs.
//
// All routines take a symmetric similarity matrix: a correlation matrix or a
// co-assignment (affinity) matrix.

#include "corrstruct/correlation.hpp"
#include "corrstruct/spectra.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace corrstruct {

/// perm[position] = series index.
struct Ordering {
    std::vector<std::size_t> perm;
    double cost = 0.0;
};

/// sum_{i,j} M[perm(i)][perm(j)] |i - j|. Throws InputError if perm is not a
/// permutation of 0..N-1.
double seriation_cost(const Eigen::MatrixXd& m, std::span<const std::size_t> perm);

bool is_permutation_of_n(std::span<const std::size_t> perm, std::size_t n);

/// Geometric-cooling schedule. Pairwise swaps and segment reversals are
/// proposed with equal probability.
struct AnnealingConfig {
    /// Target acceptance rate of uphill moves at the starting temperature,
    /// calibrated on random proposals from the identity ordering.
    double initial_acceptance = 0.8;
    double cooling = 0.95;
    /// Proposals per temperature, as a multiple of N.
    std::size_t moves_per_temperature = 20;
    /// Stop after this many consecutive temperatures without an accepted
    /// cost-changing move.
    std::size_t frozen_temperatures = 5;
    std::size_t calibration_moves = 200;
    std::size_t max_temperatures = 100000;
};

/// Best ordering found, starting from the identity. Never costlier than the
/// identity ordering; deterministic for a fixed seed.
Ordering anneal_ordering(const Eigen::MatrixXd& m, const AnnealingConfig& config,
                         std::uint64_t seed);

/// Contiguous blocks of an ordering.
struct Partition {
    std::vector<int> assignment;  ///< series index -> cluster id in 1..k
    Ordering ordering;
    std::vector<std::size_t> block_starts;  ///< positions where each block begins
    int k = 0;
    double score = 0.0;
};

/// Maximizes sum over blocks of [sum_{i != j in block} M_ij - gamma <m> b(b - 1)]
/// exactly over all contiguous segmentations of `ordering`, where <m> is the
/// mean off-diagonal entry and b the block size. Near-ties (1e-9 relative)
/// go to the longest final block, which makes structureless matrices a single
/// cluster.
Partition segment_blocks(const Eigen::MatrixXd& m, const Ordering& ordering, double gamma = 1.0);

/// The segmentation objective for explicit block boundaries.
double segmentation_score(const Eigen::MatrixXd& m, std::span<const std::size_t> perm,
                          std::span<const std::size_t> block_starts, double gamma);

struct AffinityMatrix {
    Eigen::MatrixXd values;  ///< co-assignment counts / n_runs
    std::size_t n_runs = 0;
};

AffinityMatrix affinity_matrix(std::span<const Partition> partitions);

struct ConsensusConfig {
    std::size_t n_runs = 200;
    AnnealingConfig anneal;
    double gamma = 1.0;
    std::size_t max_iterations = 50;
    unsigned threads = 1;
};

struct ConsensusResult {
    Partition partition;      ///< final partition; its ordering makes clusters contiguous
    AffinityMatrix affinity;  ///< built from the first-level runs on the input matrix
    std::size_t iterations = 0;
    bool converged = false;
};

/// Runs anneal + segment n_runs times with seeds derived from (seed, run),
/// aggregates the partitions into an affinity matrix, and repeats on the
/// affinity matrix until two consecutive affinity matrices are identical.
/// Results do not depend on config.threads.
ConsensusResult consensus_cluster(const Eigen::MatrixXd& m, const ConsensusConfig& config,
                                  std::uint64_t seed);
inline ConsensusResult consensus_cluster(const CorrelationMatrix& c, const ConsensusConfig& config,
                                         std::uint64_t seed) {
    return consensus_cluster(c.values, config, seed);
}

/// M[perm(i)][perm(j)].
Eigen::MatrixXd reorder_matrix(const Eigen::MatrixXd& m, std::span<const std::size_t> perm);
CorrelationMatrix reorder_matrix(const CorrelationMatrix& c, std::span<const std::size_t> perm);

struct ReorderedEigenvectors {
    std::vector<std::size_t> order;         ///< series index at each position
    std::vector<std::size_t> block_starts;  ///< cluster boundaries as positions
    std::vector<std::size_t> ranks;         ///< eigenvector ranks (1 = largest)
    Eigen::MatrixXd components;             ///< N x ranks.size(), rows in `order`
};

ReorderedEigenvectors reorder_eigenvectors(const SpectralDecomposition& d, const Partition& p,
                                           std::span<const std::size_t> ranks);

/// Chance-corrected agreement between two labelings of the same items.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Relabels clusters 1..k in order of first appearance by series index.
std::vector<int> canonical_labels(std::span<const int> labels);

/// Seed for a sub-task, mixed from a master seed and up to two indices.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

}  // namespace corrstruct

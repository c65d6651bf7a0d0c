#include "corrstruct/seriation.hpp"

#include "corrstruct/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <thread>

namespace corrstruct {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Unbiased integer in [0, n) (Lemire's multiply-and-reject).
std::size_t uniform_below(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t range = n;
    unsigned __int128 m = static_cast<unsigned __int128>(rng()) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
        const std::uint64_t threshold = (0 - range) % range;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(rng()) * range;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_square(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw InputError("seriation needs a square matrix");
}

/// Incremental cost changes for the two proposal moves on a symmetric
/// matrix. Columns of a column-major symmetric matrix double as rows.
class MoveEvaluator {
public:
    MoveEvaluator(const Eigen::MatrixXd& m, std::vector<std::size_t>& perm)
        : m_(m), perm_(perm), n_(perm.size()) {}

    double swap_delta(std::size_t p, std::size_t q) const {
        const double* ra = m_.col(static_cast<Eigen::Index>(perm_[p])).data();
        const double* rb = m_.col(static_cast<Eigen::Index>(perm_[q])).data();
        const auto ip = static_cast<std::ptrdiff_t>(p), iq = static_cast<std::ptrdiff_t>(q);
        double left = 0.0, right = 0.0, mid = 0.0;
        for (std::size_t k = 0; k < p; ++k) left += rb[perm_[k]] - ra[perm_[k]];
        for (std::size_t k = q + 1; k < n_; ++k) right += rb[perm_[k]] - ra[perm_[k]];
        for (std::size_t k = p + 1; k < q; ++k) {
            const auto ik = static_cast<std::ptrdiff_t>(k);
            mid += (rb[perm_[k]] - ra[perm_[k]]) * static_cast<double>(2 * ik - ip - iq);
        }
        return 2.0 * (static_cast<double>(ip - iq) * left + static_cast<double>(iq - ip) * right + mid);
    }

    double reverse_delta(std::size_t p, std::size_t q) const {
        double acc = 0.0;
        const auto s = static_cast<std::ptrdiff_t>(p + q);
        for (std::size_t i = p; i <= q; ++i) {
            const double* ri = m_.col(static_cast<Eigen::Index>(perm_[i])).data();
            double left = 0.0, right = 0.0;
            for (std::size_t k = 0; k < p; ++k) left += ri[perm_[k]];
            for (std::size_t k = q + 1; k < n_; ++k) right += ri[perm_[k]];
            acc += static_cast<double>(s - 2 * static_cast<std::ptrdiff_t>(i)) * (left - right);
        }
        return 2.0 * acc;
    }

private:
    const Eigen::MatrixXd& m_;
    std::vector<std::size_t>& perm_;
    std::size_t n_;
};

struct Proposal {
    bool reverse;
    std::size_t p;
    std::size_t q;
};

Proposal draw_proposal(std::mt19937_64& rng, std::size_t n) {
    Proposal mv;
    mv.reverse = (rng() >> 63) != 0;
    std::size_t a = uniform_below(rng, n);
    std::size_t b = uniform_below(rng, n - 1);
    if (b >= a) ++b;
    mv.p = std::min(a, b);
    mv.q = std::max(a, b);
    return mv;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0xD1B54A32D192ED03ull));
}

bool is_permutation_of_n(std::span<const std::size_t> perm, std::size_t n) {
    if (perm.size() != n) return false;
    std::vector<char> seen(n, 0);
    for (auto v : perm) {
        if (v >= n || seen[v]) return false;
        seen[v] = 1;
    }
    return true;
}

double seriation_cost(const Eigen::MatrixXd& m, std::span<const std::size_t> perm) {
    check_square(m);
    const auto n = static_cast<std::size_t>(m.rows());
    if (!is_permutation_of_n(perm, n)) throw InputError("invalid permutation");
    double cost = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        const double* rj = m.col(static_cast<Eigen::Index>(perm[j])).data();
        double row = 0.0;
        for (std::size_t i = 0; i < j; ++i) row += rj[perm[i]] * static_cast<double>(j - i);
        cost += row;
    }
    return 2.0 * cost;
}

Ordering anneal_ordering(const Eigen::MatrixXd& m, const AnnealingConfig& config,
                         std::uint64_t seed) {
    check_square(m);
    const auto n = static_cast<std::size_t>(m.rows());
    if (n < 2) throw InputError("annealing needs N >= 2");
    if (!(config.cooling > 0.0 && config.cooling < 1.0)) {
        throw InputError("cooling factor must lie in (0, 1)");
    }
    if (!(config.initial_acceptance > 0.0 && config.initial_acceptance < 1.0)) {
        throw InputError("initial acceptance must lie in (0, 1)");
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    MoveEvaluator eval(m, perm);

    Ordering best{perm, seriation_cost(m, perm)};
    const Ordering identity = best;
    if (n == 2) return best;  // both orders cost 2 M_01

    // Moves whose |delta| falls below this count as neutral.
    const double neutral = 1e-12 * static_cast<double>(n * n) *
                           std::max(1.0, m.cwiseAbs().maxCoeff());

    auto delta_of = [&](const Proposal& mv) {
        return mv.reverse ? eval.reverse_delta(mv.p, mv.q) : eval.swap_delta(mv.p, mv.q);
    };
    auto apply = [&](const Proposal& mv) {
        if (mv.reverse) {
            std::reverse(perm.begin() + static_cast<std::ptrdiff_t>(mv.p),
                         perm.begin() + static_cast<std::ptrdiff_t>(mv.q) + 1);
        } else {
            std::swap(perm[mv.p], perm[mv.q]);
        }
    };

    double uphill_sum = 0.0;
    std::size_t uphill_count = 0;
    for (std::size_t s = 0; s < config.calibration_moves; ++s) {
        const double d = delta_of(draw_proposal(rng, n));
        if (d > neutral) {
            uphill_sum += d;
            ++uphill_count;
        }
    }
    double temperature =
        uphill_count > 0
            ? -(uphill_sum / static_cast<double>(uphill_count)) / std::log(config.initial_acceptance)
            : 1.0;

    const std::size_t moves = std::max<std::size_t>(1, config.moves_per_temperature * n);
    double cost = best.cost;
    std::size_t frozen = 0;
    for (std::size_t step = 0; step < config.max_temperatures && frozen < config.frozen_temperatures;
         ++step) {
        bool changed = false;
        for (std::size_t s = 0; s < moves; ++s) {
            const Proposal mv = draw_proposal(rng, n);
            const double d = delta_of(mv);
            if (d > 0.0 && uniform_unit(rng) >= std::exp(-d / temperature)) continue;
            apply(mv);
            cost += d;
            if (std::abs(d) > neutral) changed = true;
            if (cost < best.cost - neutral) {
                best.perm = perm;
                best.cost = cost;
            }
        }
        // Resynchronize to keep the running cost free of accumulated drift.
        cost = seriation_cost(m, perm);
        frozen = changed ? 0 : frozen + 1;
        temperature *= config.cooling;
    }

    best.cost = seriation_cost(m, best.perm);
    if (best.cost > identity.cost) return identity;
    return best;
}

namespace {

/// 2-D prefix sums of a reordered matrix for O(1) block sums.
class BlockSums {
public:
    BlockSums(const Eigen::MatrixXd& m, std::span<const std::size_t> perm)
        : n_(perm.size()), sums_((n_ + 1) * (n_ + 1), 0.0), diag_(n_ + 1, 0.0) {
        for (std::size_t i = 0; i < n_; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                row += m(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]));
                at(i + 1, j + 1) = at(i, j + 1) + row;
            }
            diag_[i + 1] = diag_[i] + m(static_cast<Eigen::Index>(perm[i]),
                                        static_cast<Eigen::Index>(perm[i]));
        }
    }

    /// Off-diagonal sum over positions [lo, hi).
    double offdiag(std::size_t lo, std::size_t hi) const {
        const double block = at(hi, hi) - at(lo, hi) - at(hi, lo) + at(lo, lo);
        return block - (diag_[hi] - diag_[lo]);
    }

private:
    double& at(std::size_t i, std::size_t j) { return sums_[i * (n_ + 1) + j]; }
    double at(std::size_t i, std::size_t j) const { return sums_[i * (n_ + 1) + j]; }

    std::size_t n_;
    std::vector<double> sums_;
    std::vector<double> diag_;
};

double block_penalty(double gamma, double mean, std::size_t b) {
    return gamma * mean * static_cast<double>(b) * static_cast<double>(b - 1);
}

}  // namespace

double segmentation_score(const Eigen::MatrixXd& m, std::span<const std::size_t> perm,
                          std::span<const std::size_t> block_starts, double gamma) {
    check_square(m);
    const std::size_t n = perm.size();
    const double mean = mean_offdiagonal(m);
    double score = 0.0;
    for (std::size_t b = 0; b < block_starts.size(); ++b) {
        const std::size_t lo = block_starts[b];
        const std::size_t hi = b + 1 < block_starts.size() ? block_starts[b + 1] : n;
        double inner = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t j = lo; j < hi; ++j) {
                if (i != j) {
                    inner += m(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]));
                }
            }
        }
        score += inner - block_penalty(gamma, mean, hi - lo);
    }
    return score;
}

Partition segment_blocks(const Eigen::MatrixXd& m, const Ordering& ordering, double gamma) {
    check_square(m);
    const auto n = static_cast<std::size_t>(m.rows());
    if (!is_permutation_of_n(ordering.perm, n)) throw InputError("invalid ordering");
    if (!(gamma > 0.0)) throw InputError("gamma must be positive");

    const double mean = n >= 2 ? mean_offdiagonal(m) : 0.0;
    const BlockSums sums(m, ordering.perm);

    std::vector<double> best(n + 1, 0.0);
    std::vector<std::size_t> cut(n + 1, 0);
    std::vector<double> candidate(n + 1);
    for (std::size_t j = 1; j <= n; ++j) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < j; ++i) {
            candidate[i] = best[i] + sums.offdiag(i, j) - block_penalty(gamma, mean, j - i);
            top = std::max(top, candidate[i]);
        }
        const double tol = 1e-9 * std::max(1.0, std::abs(top));
        std::size_t pick = 0;
        while (candidate[pick] < top - tol) ++pick;
        best[j] = candidate[pick];
        cut[j] = pick;
    }

    std::vector<std::size_t> starts;
    for (std::size_t j = n; j > 0; j = cut[j]) starts.push_back(cut[j]);
    std::reverse(starts.begin(), starts.end());

    Partition p;
    p.ordering = ordering;
    p.block_starts = starts;
    p.k = static_cast<int>(starts.size());
    p.score = best[n];
    p.assignment.assign(n, 0);
    for (std::size_t b = 0; b < starts.size(); ++b) {
        const std::size_t hi = b + 1 < starts.size() ? starts[b + 1] : n;
        for (std::size_t pos = starts[b]; pos < hi; ++pos) {
            p.assignment[ordering.perm[pos]] = static_cast<int>(b + 1);
        }
    }
    return p;
}

namespace {

Eigen::MatrixXi coassignment_counts(std::span<const Partition> partitions, std::size_t n) {
    Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n),
                                                   static_cast<Eigen::Index>(n));
    for (const auto& p : partitions) {
        if (p.assignment.size() != n) throw InputError("partitions cover different series");
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                if (p.assignment[i] == p.assignment[j]) {
                    counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += 1;
                }
            }
        }
    }
    return counts;
}

AffinityMatrix to_affinity(const Eigen::MatrixXi& counts, std::size_t n_runs) {
    AffinityMatrix a;
    a.n_runs = n_runs;
    a.values = counts.cast<double>() / static_cast<double>(n_runs);
    return a;
}

std::vector<Partition> run_level(const Eigen::MatrixXd& m, const ConsensusConfig& config,
                                 std::uint64_t seed, std::uint64_t level) {
    std::vector<Partition> out(config.n_runs);
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t r = begin; r < config.n_runs; r += stride) {
            const Ordering ord = anneal_ordering(m, config.anneal, derive_seed(seed, level, r));
            out[r] = segment_blocks(m, ord, config.gamma);
        }
    };
    const unsigned threads = std::max(
        1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.n_runs)));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
        for (auto& t : pool) t.join();
    }
    return out;
}

const Partition& best_scoring(const std::vector<Partition>& parts) {
    std::size_t pick = 0;
    for (std::size_t r = 1; r < parts.size(); ++r) {
        if (parts[r].score > parts[pick].score) pick = r;
    }
    return parts[pick];
}

}  // namespace

AffinityMatrix affinity_matrix(std::span<const Partition> partitions) {
    if (partitions.empty()) throw InputError("affinity needs at least one partition");
    const std::size_t n = partitions.front().assignment.size();
    return to_affinity(coassignment_counts(partitions, n), partitions.size());
}

ConsensusResult consensus_cluster(const Eigen::MatrixXd& m, const ConsensusConfig& config,
                                  std::uint64_t seed) {
    check_square(m);
    if (config.n_runs < 1) throw InputError("consensus needs n_runs >= 1");
    const auto n = static_cast<std::size_t>(m.rows());

    auto parts = run_level(m, config, seed, 0);
    Eigen::MatrixXi counts = coassignment_counts(parts, n);

    ConsensusResult result;
    result.affinity = to_affinity(counts, config.n_runs);

    const Partition* final_part = nullptr;
    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        const AffinityMatrix current = to_affinity(counts, config.n_runs);
        parts = run_level(current.values, config, seed, it);
        Eigen::MatrixXi next = coassignment_counts(parts, n);
        result.iterations = it;
        final_part = &best_scoring(parts);
        if (next == counts) {
            result.converged = true;
            break;
        }
        counts = std::move(next);
    }
    if (final_part == nullptr) {
        // max_iterations == 0: fall back to the first-level runs.
        final_part = &best_scoring(parts);
    }
    result.partition = *final_part;
    return result;
}

Eigen::MatrixXd reorder_matrix(const Eigen::MatrixXd& m, std::span<const std::size_t> perm) {
    check_square(m);
    const auto n = static_cast<std::size_t>(m.rows());
    if (!is_permutation_of_n(perm, n)) throw InputError("invalid permutation");
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                m(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]));
        }
    }
    return out;
}

CorrelationMatrix reorder_matrix(const CorrelationMatrix& c, std::span<const std::size_t> perm) {
    CorrelationMatrix out;
    out.values = reorder_matrix(c.values, perm);
    out.t_effective = c.t_effective;
    for (auto idx : perm) out.labels.push_back(c.labels[idx]);
    return out;
}

ReorderedEigenvectors reorder_eigenvectors(const SpectralDecomposition& d, const Partition& p,
                                           std::span<const std::size_t> ranks) {
    const std::size_t n = d.size();
    if (p.assignment.size() != n || !is_permutation_of_n(p.ordering.perm, n)) {
        throw InputError("partition does not cover every series");
    }
    ReorderedEigenvectors out;
    out.order = p.ordering.perm;
    out.block_starts = p.block_starts;
    out.ranks.assign(ranks.begin(), ranks.end());
    out.components.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ranks.size()));
    for (std::size_t c = 0; c < ranks.size(); ++c) {
        if (ranks[c] < 1 || ranks[c] > n) throw InputError("eigenvector rank out of range");
        for (std::size_t pos = 0; pos < n; ++pos) {
            out.components(static_cast<Eigen::Index>(pos), static_cast<Eigen::Index>(c)) =
                d.eigenvectors(static_cast<Eigen::Index>(out.order[pos]),
                               static_cast<Eigen::Index>(ranks[c] - 1));
        }
    }
    return out;
}

std::vector<int> canonical_labels(std::span<const int> labels) {
    std::map<int, int> remap;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()) + 1);
        out.push_back(it->second);
    }
    return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw InputError("labelings have different lengths");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        joint[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto pairs = [](double x) { return 0.5 * x * (x - 1.0); };
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [key, v] : joint) index += pairs(v);
    for (const auto& [key, v] : rows) sum_rows += pairs(v);
    for (const auto& [key, v] : cols) sum_cols += pairs(v);
    const double expected = sum_rows * sum_cols / pairs(static_cast<double>(n));
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

}  // namespace corrstruct

#pragma once

// Eigen-spectrum of a correlation matrix against the Marchenko-Pastur
// prediction for a random T x N matrix.

#include "corrstruct/correlation.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace corrstruct {

/// Edges of the random-matrix eigenvalue bulk for Q = T/N >= 1.
struct MPBounds {
    double q = 1.0;
    double sigma2 = 1.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

/// Throws InputError when n < 2, t < n (Q < 1) or sigma2 <= 0.
MPBounds mp_bounds(std::size_t t, std::size_t n, double sigma2 = 1.0);
MPBounds mp_bounds_for_ratio(double q, double sigma2 = 1.0);

/// Limiting eigenvalue density; zero outside [lambda_min, lambda_max].
double mp_density(double lambda, const MPBounds& bounds);

/// Integral of mp_density from lambda_min to lambda.
double mp_cdf(double lambda, const MPBounds& bounds);

/// sup |F_empirical - F_MP| over the sample, evaluated on both sides of
/// every jump of the empirical CDF.
double mp_kolmogorov_distance(std::span<const double> eigenvalues, const MPBounds& bounds);

/// Fraction of eigenvalues outside [lambda_min, lambda_max].
double fraction_outside_bulk(std::span<const double> eigenvalues, const MPBounds& bounds);

enum class EigenClass { Above, Bulk, Below };

const char* to_string(EigenClass cls);
EigenClass classify(double lambda, const MPBounds& bounds);

/// Eigenpairs sorted by descending eigenvalue. Column k of `eigenvectors`
/// belongs to eigenvalues(k); each column has its largest-magnitude component
/// positive (first such index on ties).
struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    MPBounds bounds;
    std::vector<EigenClass> classes;

    std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
    /// 1-based rank, rank 1 is the largest eigenvalue.
    Eigen::VectorXd vector(std::size_t rank) const {
        return eigenvectors.col(static_cast<Eigen::Index>(rank - 1));
    }
};

/// Throws NumericalError for a non-symmetric matrix or a solver failure.
SpectralDecomposition eigendecompose(const Eigen::MatrixXd& c, const MPBounds& bounds);
inline SpectralDecomposition eigendecompose(const CorrelationMatrix& c, const MPBounds& bounds) {
    return eigendecompose(c.values, bounds);
}

struct BulkDeviation {
    std::size_t above = 0;
    std::size_t bulk = 0;
    std::size_t below = 0;
    double explained_variance = 0.0;  ///< lambda_1 / N
};

BulkDeviation bulk_deviation_report(const SpectralDecomposition& d);

struct DominantComponent {
    std::size_t series;
    double value;
};

struct ImpliedPair {
    std::size_t first;
    std::size_t second;
    double correlation;
};

/// High-correlation pairs suggested by one of the smallest eigenvectors.
struct PairLocalization {
    std::size_t rank = 0;  ///< 1-based eigenvalue rank (N for the smallest)
    double eigenvalue = 0.0;
    std::vector<DominantComponent> dominant;  ///< by descending |value|
    std::vector<ImpliedPair> pairs;  ///< opposite-sign dominant pairs, strongest first
};

inline constexpr double kDefaultDominance = 0.5;

/// Inspects the k_smallest smallest eigenvectors, smallest first. Components
/// with |u| >= dominance are dominant; every opposite-sign pair of dominant
/// components is reported with its correlation, ordered by |u_i u_j|.
std::vector<PairLocalization> localize_pairs(const SpectralDecomposition& d,
                                             const CorrelationMatrix& c, std::size_t k_smallest,
                                             double dominance = kDefaultDominance);

}  // namespace corrstruct

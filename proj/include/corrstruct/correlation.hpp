#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace corrstruct {

/// Symmetric cross-correlation matrix with unit diagonal.
struct CorrelationMatrix {
    std::vector<std::string> labels;
    Eigen::MatrixXd values;
    std::size_t t_effective = 0;  ///< number of time samples behind each entry

    std::size_t size() const { return labels.size(); }
    double operator()(std::size_t i, std::size_t j) const {
        return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

/// c_ij = <g_i g_j> over the rows of a standardized return matrix. Each entry
/// is a single sequential dot product, so the result does not depend on the
/// thread count. Throws InputError for fewer than 2 rows.
CorrelationMatrix correlation_matrix(const Eigen::MatrixXd& standardized,
                                     std::vector<std::string> labels = {},
                                     unsigned threads = 1);

/// Mean of the N(N-1)/2 strictly upper-triangular entries.
double mean_offdiagonal(const Eigen::MatrixXd& c);
inline double mean_offdiagonal(const CorrelationMatrix& c) { return mean_offdiagonal(c.values); }

/// Density histogram of the off-diagonal coefficients on [-1, 1].
struct CoefficientHistogram {
    std::vector<double> bin_edges;  ///< n_bins + 1 breakpoints
    std::vector<double> densities;  ///< per-bin probability density
    std::size_t n_pairs = 0;
    std::vector<std::size_t> peak_bins;  ///< bins holding a prominent local maximum

    std::size_t peak_count() const { return peak_bins.size(); }
    std::vector<double> bin_centers() const;
};

inline constexpr std::size_t kDefaultHistogramBins = 50;
inline constexpr double kDefaultPeakProminence = 0.05;

/// min_relative_prominence is a fraction of the maximum density.
CoefficientHistogram coefficient_histogram(const CorrelationMatrix& c,
                                           std::size_t n_bins = kDefaultHistogramBins,
                                           double min_relative_prominence = kDefaultPeakProminence);

/// Indices of local maxima (plateaus reported at their first bin) whose
/// topographic prominence is at least min_prominence. Values outside the
/// sequence are treated as zero.
std::vector<std::size_t> find_peaks(std::span<const double> values, double min_prominence);

}  // namespace corrstruct

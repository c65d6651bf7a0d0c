#pragma once

// Delimited-text and JSON forms of every pipeline artifact. CSV files carry a
// one-line header; numbers are written in shortest round-trip form so that
// re-reading a file reproduces the values exactly.

#include "corrstruct/correlation.hpp"
#include "corrstruct/ingest.hpp"
#include "corrstruct/portfolio.hpp"
#include "corrstruct/seriation.hpp"
#include "corrstruct/spectra.hpp"

#include <json.hpp>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace corrstruct::report {

using json = nlohmann::ordered_json;

std::string format_number(double v);

void write_price_panel_csv(const PricePanel& panel, std::ostream& out);

void write_returns_csv(const ReturnPanel& panel, std::ostream& out);
/// Moments, clipped cells and (optionally) the fill log of the source panel.
json returns_sidecar(const ReturnPanel& panel, const PricePanel* source = nullptr);
ReturnPanel read_returns(std::istream& csv, const json& sidecar);

void write_matrix_csv(const Eigen::MatrixXd& m, std::span<const std::string> labels,
                      std::ostream& out);
void write_correlation_csv(const CorrelationMatrix& c, std::ostream& out);
json to_json(const CorrelationMatrix& c);
CorrelationMatrix correlation_from_json(const json& j);

/// Columns bin_center,density.
void write_histogram_csv(const CoefficientHistogram& h, std::ostream& out);
json to_json(const CoefficientHistogram& h);

json to_json(const MPBounds& b);
json spectrum_json(const SpectralDecomposition& d, std::span<const std::string> labels,
                   std::span<const PairLocalization> pairs);
/// Empirical eigenvalue density on n_bins equal bins over [0, max eigenvalue].
void write_eigenvalue_histogram_csv(const SpectralDecomposition& d, std::size_t n_bins,
                                    std::ostream& out);
/// Marchenko-Pastur density sampled on `points` grid points across the bulk.
void write_mp_curve_csv(const MPBounds& b, std::size_t points, std::ostream& out);

json to_json(const Partition& p, std::span<const std::string> labels);
/// Columns label,cluster in series order.
void write_partition_csv(const Partition& p, std::span<const std::string> labels, std::ostream& out);
/// Matrix reordered by the partition with columns reversed, so blocks lie
/// along the anti-diagonal when plotted as an image.
void write_fig2b_csv(const CorrelationMatrix& c, const Partition& p, std::ostream& out);
void write_reordered_eigenvectors_csv(const ReorderedEigenvectors& r,
                                      std::span<const std::string> labels, std::ostream& out);

/// Columns date,mean_return,R_k...
void write_eigenportfolios_csv(std::span<const Date> dates, std::span<const Eigenportfolio> ports,
                               const Eigen::VectorXd& mean_return, std::ostream& out);
/// Columns date,index,average_price,uniform_benchmark.
void write_index_csv(std::span<const Date> dates, const BuyAndHoldReport& report,
                     const IndexSeries& benchmark, std::ostream& out);

}  // namespace corrstruct::report

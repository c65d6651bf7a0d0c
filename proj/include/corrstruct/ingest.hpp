#pragma once

// Price panel loading, alignment and repair; log-returns with abnormal
// fluctuation removal; columnwise standardization.

#include "corrstruct/date.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace corrstruct {

enum class Layout {
    Wide,  ///< date column followed by one price column per series
    Long,  ///< rows of (date, label, price)
};

Layout parse_layout(const std::string& name);

enum class FillMethod { Forward, Backward };

const char* to_string(FillMethod method);

struct FillRecord {
    std::size_t series;
    Date date;
    FillMethod method;
};

/// Prices aligned on a common date axis. Rows are dates, columns are series.
struct PricePanel {
    std::vector<Date> dates;
    std::vector<std::string> labels;
    Eigen::MatrixXd prices;
    std::vector<FillRecord> fill_log;

    std::size_t n_dates() const { return dates.size(); }
    std::size_t n_series() const { return labels.size(); }
};

struct LoadOptions {
    /// Restrict the axis to [latest first observation, earliest last
    /// observation] across series. When false the full union of dates is
    /// kept and leading gaps are backward filled.
    bool trim_to_common_range = true;
    /// 0 means auto-detect from the header line (tab, semicolon or comma).
    char delimiter = 0;
};

PricePanel load_panel(const std::filesystem::path& source, Layout layout,
                      const LoadOptions& options = {});
PricePanel parse_panel(std::istream& in, Layout layout, const LoadOptions& options = {});

/// Raw observations before alignment: one entry per (date, series) cell that
/// appeared in the input. NaN marks an explicitly missing cell.
struct RawObservation {
    Date date;
    std::size_t series;
    double price;
};

/// Aligns raw observations onto a date axis and repairs missing or
/// non-positive cells by carrying the last valid price forward.
PricePanel align_panel(std::vector<std::string> labels, std::vector<RawObservation> observations,
                       const LoadOptions& options = {});

struct ClippedCell {
    std::size_t series;
    Date date;
    double value;  ///< the removed return
};

/// Log-returns over a horizon of delta_t rows, with per-series moments.
struct ReturnPanel {
    std::vector<Date> dates;  ///< date of the later price in each difference
    std::vector<std::string> labels;
    Eigen::MatrixXd returns;  ///< (T - delta_t) x N
    int delta_t = 1;
    double clip_threshold = 0.40;
    Eigen::VectorXd means;
    Eigen::VectorXd stddevs;  ///< population convention
    std::vector<ClippedCell> clipped;

    std::size_t n_samples() const { return static_cast<std::size_t>(returns.rows()); }
    std::size_t n_series() const { return labels.size(); }
};

inline constexpr double kDefaultClipThreshold = 0.40;

/// r_i(t) = ln P_i(t) - ln P_i(t - delta_t). Returns with |r| above
/// clip_threshold are set to zero and recorded. Throws NumericalError when a
/// series has zero variance after clipping.
ReturnPanel compute_returns(const PricePanel& panel, int delta_t = 1,
                            double clip_threshold = kDefaultClipThreshold);

/// Builds a ReturnPanel around an existing return matrix (moments filled in).
ReturnPanel make_return_panel(Eigen::MatrixXd returns, std::vector<std::string> labels,
                              std::vector<Date> dates = {}, int delta_t = 1);

/// Column means and population standard deviations.
void column_moments(const Eigen::MatrixXd& x, Eigen::VectorXd& means, Eigen::VectorXd& stddevs);

/// g_i(t) = (r_i(t) - <r_i>) / sigma_i using the panel's stored moments.
Eigen::MatrixXd standardize(const ReturnPanel& panel);

/// Standardizes each column of x (population convention). Throws
/// NumericalError on a constant column.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x);

/// Default series labels "S1".."Sn".
std::vector<std::string> default_labels(std::size_t n);

}  // namespace corrstruct

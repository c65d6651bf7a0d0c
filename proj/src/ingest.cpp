#include "corrstruct/ingest.hpp"

#include "corrstruct/error.hpp"
#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace corrstruct {

Layout parse_layout(const std::string& name) {
    if (name == "wide") return Layout::Wide;
    if (name == "long") return Layout::Long;
    throw InputError("unknown layout '" + name + "' (expected wide or long)");
}

const char* to_string(FillMethod method) {
    return method == FillMethod::Forward ? "forward" : "backward";
}

std::vector<std::string> default_labels(std::size_t n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back("S" + std::to_string(i + 1));
    return labels;
}

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

bool is_missing_token(const std::string& field) {
    static const std::set<std::string> tokens = {"",    "NA",   "N/A", "#N/A", "NaN",
                                                 "nan", "null", "NULL", "-"};
    return tokens.count(field) > 0;
}

double parse_price(const std::string& field, std::size_t line_no) {
    if (is_missing_token(field)) return kMissing;
    double value = 0.0;
    if (!detail::parse_double(field, value)) {
        throw InputError("line " + std::to_string(line_no) + ": unparseable price '" + field + "'");
    }
    return value;
}

bool valid_price(double p) { return std::isfinite(p) && p > 0.0; }

}  // namespace

PricePanel parse_panel(std::istream& in, Layout layout, const LoadOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    char delim = options.delimiter;

    std::vector<std::string> labels;
    std::vector<RawObservation> obs;

    auto next_line = [&](std::string& out) {
        while (std::getline(in, out)) {
            ++line_no;
            if (!out.empty() && out.back() == '\r') out.pop_back();
            if (!detail::trim(out).empty()) return true;
        }
        return false;
    };

    if (!next_line(line)) throw InputError("empty price file");
    if (delim == 0) delim = detail::detect_delimiter(line);

    if (layout == Layout::Wide) {
        auto header = detail::split(line, delim);
        if (header.size() < 3) {
            throw InputError("wide layout needs a date column and at least 2 series columns");
        }
        labels.assign(header.begin() + 1, header.end());
        while (next_line(line)) {
            auto fields = detail::split(line, delim);
            if (fields.size() != header.size()) {
                throw InputError("line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
            }
            Date date;
            if (!try_parse_iso_date(fields[0], date)) {
                throw InputError("line " + std::to_string(line_no) + ": unparseable date '" +
                                 fields[0] + "'");
            }
            for (std::size_t j = 1; j < fields.size(); ++j) {
                obs.push_back({date, j - 1, parse_price(fields[j], line_no)});
            }
        }
    } else {
        std::unordered_map<std::string, std::size_t> index;
        bool first = true;
        do {
            auto fields = detail::split(line, delim);
            Date date;
            if (first && (fields.empty() || !try_parse_iso_date(fields[0], date))) {
                first = false;  // header row
                continue;
            }
            first = false;
            if (fields.size() != 3) {
                throw InputError("line " + std::to_string(line_no) +
                                 ": long layout expects date,label,price");
            }
            if (!try_parse_iso_date(fields[0], date)) {
                throw InputError("line " + std::to_string(line_no) + ": unparseable date '" +
                                 fields[0] + "'");
            }
            auto [it, inserted] = index.emplace(fields[1], labels.size());
            if (inserted) labels.push_back(fields[1]);
            obs.push_back({date, it->second, parse_price(fields[2], line_no)});
        } while (next_line(line));
    }

    return align_panel(std::move(labels), std::move(obs), options);
}

PricePanel load_panel(const std::filesystem::path& source, Layout layout,
                      const LoadOptions& options) {
    std::ifstream in(source);
    if (!in) throw InputError("cannot open price file '" + source.string() + "'");
    return parse_panel(in, layout, options);
}

PricePanel align_panel(std::vector<std::string> labels, std::vector<RawObservation> observations,
                       const LoadOptions& options) {
    const std::size_t n = labels.size();
    if (n < 2) throw InputError("at least 2 series are required");
    {
        std::set<std::string> seen;
        for (const auto& l : labels) {
            if (!seen.insert(l).second) throw InputError("duplicate series label '" + l + "'");
        }
    }

    std::vector<Date> axis;
    axis.reserve(observations.size() / n + 1);
    for (const auto& o : observations) axis.push_back(o.date);
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
    const std::size_t t_all = axis.size();

    Eigen::MatrixXd cells = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(t_all),
                                                      static_cast<Eigen::Index>(n), kMissing);
    std::vector<char> present(t_all * n, 0);
    for (const auto& o : observations) {
        auto row = static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), o.date) -
                                            axis.begin());
        if (present[row * n + o.series]) {
            throw InputError("duplicate observation for series '" + labels[o.series] + "' on " +
                             o.date.iso());
        }
        present[row * n + o.series] = 1;
        cells(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(o.series)) = o.price;
    }

    std::vector<std::size_t> first(n), last(n);
    for (std::size_t j = 0; j < n; ++j) {
        bool found = false;
        for (std::size_t t = 0; t < t_all; ++t) {
            if (valid_price(cells(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)))) {
                if (!found) first[j] = t;
                last[j] = t;
                found = true;
            }
        }
        if (!found) throw InputError("series '" + labels[j] + "' has no valid prices");
    }

    std::size_t lo = 0, hi = t_all == 0 ? 0 : t_all - 1;
    if (options.trim_to_common_range) {
        lo = *std::max_element(first.begin(), first.end());
        hi = *std::min_element(last.begin(), last.end());
        if (lo > hi) throw InputError("series have no common date range");
    }
    if (t_all == 0 || hi - lo + 1 < 2) throw InputError("at least 2 dates are required");

    PricePanel panel;
    panel.labels = std::move(labels);
    panel.dates.assign(axis.begin() + static_cast<std::ptrdiff_t>(lo),
                       axis.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    panel.prices.resize(static_cast<Eigen::Index>(hi - lo + 1), static_cast<Eigen::Index>(n));

    for (std::size_t j = 0; j < n; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        double carried = kMissing;
        for (std::size_t t = 0; t <= hi; ++t) {
            const double v = cells(static_cast<Eigen::Index>(t), col);
            if (valid_price(v)) carried = v;
            if (t < lo) continue;
            const auto row = static_cast<Eigen::Index>(t - lo);
            if (valid_price(v)) {
                panel.prices(row, col) = v;
            } else if (!std::isnan(carried)) {
                panel.prices(row, col) = carried;
                panel.fill_log.push_back({j, axis[t], FillMethod::Forward});
            } else {
                // Leading gap: nothing observed yet, take the first observation.
                panel.prices(row, col) = cells(static_cast<Eigen::Index>(first[j]), col);
                panel.fill_log.push_back({j, axis[t], FillMethod::Backward});
            }
        }
    }
    return panel;
}

void column_moments(const Eigen::MatrixXd& x, Eigen::VectorXd& means, Eigen::VectorXd& stddevs) {
    const auto rows = static_cast<double>(x.rows());
    means = x.colwise().sum().transpose() / rows;
    stddevs.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        stddevs(j) = std::sqrt((x.col(j).array() - means(j)).square().sum() / rows);
    }
}

ReturnPanel compute_returns(const PricePanel& panel, int delta_t, double clip_threshold) {
    const auto t_rows = static_cast<int>(panel.n_dates());
    if (delta_t < 1 || delta_t >= t_rows) {
        throw InputError("delta_t must satisfy 1 <= delta_t < T (T = " + std::to_string(t_rows) +
                         ")");
    }
    if (!(clip_threshold > 0.0)) throw InputError("clip threshold must be positive");

    ReturnPanel out;
    out.labels = panel.labels;
    out.delta_t = delta_t;
    out.clip_threshold = clip_threshold;
    out.dates.assign(panel.dates.begin() + delta_t, panel.dates.end());

    const Eigen::MatrixXd logp = panel.prices.array().log().matrix();
    const Eigen::Index rows = t_rows - delta_t;
    out.returns = logp.bottomRows(rows) - logp.topRows(rows);

    for (Eigen::Index j = 0; j < out.returns.cols(); ++j) {
        for (Eigen::Index t = 0; t < rows; ++t) {
            double& r = out.returns(t, j);
            if (std::abs(r) > clip_threshold) {
                out.clipped.push_back({static_cast<std::size_t>(j),
                                       out.dates[static_cast<std::size_t>(t)], r});
                r = 0.0;
            }
        }
    }

    column_moments(out.returns, out.means, out.stddevs);
    for (Eigen::Index j = 0; j < out.stddevs.size(); ++j) {
        if (!(out.stddevs(j) > 0.0)) {
            throw NumericalError("series '" + out.labels[static_cast<std::size_t>(j)] +
                                 "' has zero return variance");
        }
    }
    return out;
}

ReturnPanel make_return_panel(Eigen::MatrixXd returns, std::vector<std::string> labels,
                              std::vector<Date> dates, int delta_t) {
    if (labels.empty()) labels = default_labels(static_cast<std::size_t>(returns.cols()));
    if (labels.size() != static_cast<std::size_t>(returns.cols())) {
        throw InputError("label count does not match return columns");
    }
    if (dates.empty()) {
        const Date start(2000, 1, 1);
        for (Eigen::Index t = 0; t < returns.rows(); ++t) dates.push_back(start + static_cast<int>(t));
    }
    if (dates.size() != static_cast<std::size_t>(returns.rows())) {
        throw InputError("date count does not match return rows");
    }
    ReturnPanel out;
    out.returns = std::move(returns);
    out.labels = std::move(labels);
    out.dates = std::move(dates);
    out.delta_t = delta_t;
    column_moments(out.returns, out.means, out.stddevs);
    return out;
}

Eigen::MatrixXd standardize(const ReturnPanel& panel) {
    if ((panel.stddevs.array() <= 0.0).any()) {
        throw NumericalError("cannot standardize a series with zero variance");
    }
    Eigen::MatrixXd g = panel.returns.rowwise() - panel.means.transpose();
    return g.array().rowwise() / panel.stddevs.transpose().array();
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x) {
    Eigen::VectorXd means, sds;
    column_moments(x, means, sds);
    if (!(sds.array() > 0.0).all()) {
        throw NumericalError("cannot standardize a constant column");
    }
    Eigen::MatrixXd g = x.rowwise() - means.transpose();
    return g.array().rowwise() / sds.transpose().array();
}

}  // namespace corrstruct

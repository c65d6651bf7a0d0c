#include "corrstruct/report.hpp"

#include "corrstruct/error.hpp"
#include "csv.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace corrstruct::report {

std::string format_number(double v) { return detail::format_double(v); }

namespace {

json vector_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

void write_header(std::ostream& out, const std::string& first, std::span<const std::string> rest) {
    out << first;
    for (const auto& s : rest) out << ',' << s;
    out << '\n';
}

}  // namespace

void write_price_panel_csv(const PricePanel& panel, std::ostream& out) {
    write_header(out, "date", panel.labels);
    for (std::size_t t = 0; t < panel.n_dates(); ++t) {
        out << panel.dates[t].iso();
        for (Eigen::Index j = 0; j < panel.prices.cols(); ++j) {
            out << ',' << format_number(panel.prices(static_cast<Eigen::Index>(t), j));
        }
        out << '\n';
    }
}

void write_returns_csv(const ReturnPanel& panel, std::ostream& out) {
    write_header(out, "date", panel.labels);
    for (std::size_t t = 0; t < panel.n_samples(); ++t) {
        out << panel.dates[t].iso();
        for (Eigen::Index j = 0; j < panel.returns.cols(); ++j) {
            out << ',' << format_number(panel.returns(static_cast<Eigen::Index>(t), j));
        }
        out << '\n';
    }
}

json returns_sidecar(const ReturnPanel& panel, const PricePanel* source) {
    json j;
    j["delta_t"] = panel.delta_t;
    j["clip_threshold"] = panel.clip_threshold;
    j["n_samples"] = panel.n_samples();
    j["labels"] = panel.labels;
    j["means"] = vector_json(panel.means);
    j["stddevs"] = vector_json(panel.stddevs);
    json clipped = json::array();
    for (const auto& c : panel.clipped) {
        clipped.push_back({{"series", panel.labels[c.series]}, {"date", c.date.iso()}, {"value", c.value}});
    }
    j["clipped"] = clipped;
    json fills = json::array();
    if (source != nullptr) {
        for (const auto& f : source->fill_log) {
            fills.push_back({{"series", source->labels[f.series]},
                             {"date", f.date.iso()},
                             {"method", to_string(f.method)}});
        }
    }
    j["fill_log"] = fills;
    return j;
}

ReturnPanel read_returns(std::istream& csv, const json& sidecar) {
    std::string line;
    if (!std::getline(csv, line)) throw InputError("empty returns file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const char delim = detail::detect_delimiter(line);
    auto header = detail::split(line, delim);
    if (header.size() < 3) throw InputError("returns file needs a date column and >= 2 series");
    std::vector<std::string> labels(header.begin() + 1, header.end());

    std::vector<Date> dates;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(csv, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split(line, delim);
        if (fields.size() != header.size()) {
            throw InputError("returns line " + std::to_string(line_no) + ": wrong field count");
        }
        dates.push_back(parse_iso_date(fields[0]));
        std::vector<double> row;
        for (std::size_t k = 1; k < fields.size(); ++k) {
            double v = 0.0;
            if (!detail::parse_double(fields[k], v)) {
                throw InputError("returns line " + std::to_string(line_no) + ": bad number '" +
                                 fields[k] + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw InputError("returns file needs at least 2 rows");

    Eigen::MatrixXd r(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(labels.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t k = 0; k < labels.size(); ++k) {
            r(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = rows[t][k];
        }
    }
    ReturnPanel panel = make_return_panel(std::move(r), labels, std::move(dates),
                                          sidecar.value("delta_t", 1));
    panel.clip_threshold = sidecar.value("clip_threshold", kDefaultClipThreshold);
    if (sidecar.contains("clipped")) {
        for (const auto& c : sidecar["clipped"]) {
            const auto it = std::find(labels.begin(), labels.end(), c.at("series").get<std::string>());
            if (it == labels.end()) throw InputError("sidecar references an unknown series");
            panel.clipped.push_back({static_cast<std::size_t>(it - labels.begin()),
                                     parse_iso_date(c.at("date").get<std::string>()),
                                     c.at("value").get<double>()});
        }
    }
    for (Eigen::Index j = 0; j < panel.stddevs.size(); ++j) {
        if (!(panel.stddevs(j) > 0.0)) {
            throw NumericalError("series '" + labels[static_cast<std::size_t>(j)] +
                                 "' has zero return variance");
        }
    }
    return panel;
}

void write_matrix_csv(const Eigen::MatrixXd& m, std::span<const std::string> labels,
                      std::ostream& out) {
    write_header(out, "label", labels);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_number(m(i, j));
        out << '\n';
    }
}

void write_correlation_csv(const CorrelationMatrix& c, std::ostream& out) {
    write_matrix_csv(c.values, c.labels, out);
}

json to_json(const CorrelationMatrix& c) {
    json j;
    j["labels"] = c.labels;
    j["t_effective"] = c.t_effective;
    json rows = json::array();
    for (Eigen::Index i = 0; i < c.values.rows(); ++i) {
        rows.push_back(vector_json(c.values.row(i).transpose()));
    }
    j["values"] = rows;
    return j;
}

CorrelationMatrix correlation_from_json(const json& j) {
    CorrelationMatrix c;
    try {
        c.labels = j.at("labels").get<std::vector<std::string>>();
        c.t_effective = j.at("t_effective").get<std::size_t>();
        const auto& rows = j.at("values");
        const auto n = static_cast<Eigen::Index>(c.labels.size());
        if (static_cast<Eigen::Index>(rows.size()) != n) throw InputError("matrix row count mismatch");
        c.values.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& row = rows.at(static_cast<std::size_t>(i));
            if (static_cast<Eigen::Index>(row.size()) != n) throw InputError("matrix column count mismatch");
            for (Eigen::Index k = 0; k < n; ++k) c.values(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed correlation JSON: ") + e.what());
    }
    return c;
}

void write_histogram_csv(const CoefficientHistogram& h, std::ostream& out) {
    out << "bin_center,density\n";
    const auto centers = h.bin_centers();
    for (std::size_t k = 0; k < centers.size(); ++k) {
        out << format_number(centers[k]) << ',' << format_number(h.densities[k]) << '\n';
    }
}

json to_json(const CoefficientHistogram& h) {
    json j;
    j["n_pairs"] = h.n_pairs;
    j["n_bins"] = h.densities.size();
    j["peak_count"] = h.peak_count();
    const auto centers = h.bin_centers();
    json peaks = json::array();
    for (auto b : h.peak_bins) peaks.push_back(centers[b]);
    j["peak_centers"] = peaks;
    return j;
}

json to_json(const MPBounds& b) {
    return json{{"q", b.q}, {"sigma2", b.sigma2}, {"lambda_min", b.lambda_min}, {"lambda_max", b.lambda_max}};
}

json spectrum_json(const SpectralDecomposition& d, std::span<const std::string> labels,
                   std::span<const PairLocalization> pairs) {
    const BulkDeviation dev = bulk_deviation_report(d);
    json j;
    j["bounds"] = to_json(d.bounds);
    j["counts"] = {{"above", dev.above}, {"bulk", dev.bulk}, {"below", dev.below}};
    j["explained_variance"] = dev.explained_variance;
    j["eigenvalues"] = vector_json(d.eigenvalues);
    json classes = json::array();
    for (auto c : d.classes) classes.push_back(to_string(c));
    j["classes"] = classes;
    j["labels"] = json(std::vector<std::string>(labels.begin(), labels.end()));
    json vectors = json::array();
    for (Eigen::Index k = 0; k < d.eigenvectors.cols(); ++k) {
        vectors.push_back({{"rank", k + 1}, {"components", vector_json(d.eigenvectors.col(k))}});
    }
    j["eigenvectors"] = vectors;
    json locs = json::array();
    for (const auto& loc : pairs) {
        json dom = json::array();
        for (const auto& c : loc.dominant) dom.push_back({{"series", labels[c.series]}, {"value", c.value}});
        json implied = json::array();
        for (const auto& p : loc.pairs) {
            implied.push_back({{"first", labels[p.first]}, {"second", labels[p.second]}, {"correlation", p.correlation}});
        }
        locs.push_back({{"rank", loc.rank}, {"eigenvalue", loc.eigenvalue}, {"dominant", dom}, {"pairs", implied}});
    }
    j["pair_localization"] = locs;
    return j;
}

void write_eigenvalue_histogram_csv(const SpectralDecomposition& d, std::size_t n_bins,
                                    std::ostream& out) {
    out << "bin_center,density\n";
    if (n_bins == 0 || d.size() == 0) return;
    const double top = std::max(d.eigenvalues.maxCoeff(), d.bounds.lambda_max);
    const double width = top / static_cast<double>(n_bins);
    std::vector<double> counts(n_bins, 0.0);
    for (Eigen::Index k = 0; k < d.eigenvalues.size(); ++k) {
        auto bin = static_cast<std::size_t>(std::max(0.0, d.eigenvalues(k)) / width);
        counts[std::min(bin, n_bins - 1)] += 1.0;
    }
    const double norm = 1.0 / (static_cast<double>(d.size()) * width);
    for (std::size_t b = 0; b < n_bins; ++b) {
        out << format_number((static_cast<double>(b) + 0.5) * width) << ','
            << format_number(counts[b] * norm) << '\n';
    }
}

void write_mp_curve_csv(const MPBounds& b, std::size_t points, std::ostream& out) {
    out << "lambda,density\n";
    if (points < 2) return;
    for (std::size_t i = 0; i < points; ++i) {
        const double x = b.lambda_min + (b.lambda_max - b.lambda_min) * static_cast<double>(i) /
                                            static_cast<double>(points - 1);
        out << format_number(x) << ',' << format_number(mp_density(x, b)) << '\n';
    }
}

json to_json(const Partition& p, std::span<const std::string> labels) {
    json j;
    j["k"] = p.k;
    j["score"] = p.score;
    json clusters = json::object();
    for (std::size_t i = 0; i < p.assignment.size(); ++i) clusters[labels[i]] = p.assignment[i];
    j["clusters"] = clusters;
    json order = json::array();
    for (auto idx : p.ordering.perm) order.push_back(labels[idx]);
    j["ordering"] = order;
    j["ordering_cost"] = p.ordering.cost;
    j["block_starts"] = p.block_starts;
    return j;
}

void write_partition_csv(const Partition& p, std::span<const std::string> labels, std::ostream& out) {
    out << "label,cluster\n";
    for (std::size_t i = 0; i < p.assignment.size(); ++i) out << labels[i] << ',' << p.assignment[i] << '\n';
}

void write_fig2b_csv(const CorrelationMatrix& c, const Partition& p, std::ostream& out) {
    const CorrelationMatrix r = reorder_matrix(c, p.ordering.perm);
    const auto n = static_cast<Eigen::Index>(r.size());
    out << "label";
    for (Eigen::Index j = n - 1; j >= 0; --j) out << ',' << r.labels[static_cast<std::size_t>(j)];
    out << '\n';
    for (Eigen::Index i = 0; i < n; ++i) {
        out << r.labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = n - 1; j >= 0; --j) out << ',' << format_number(r.values(i, j));
        out << '\n';
    }
}

void write_reordered_eigenvectors_csv(const ReorderedEigenvectors& r,
                                      std::span<const std::string> labels, std::ostream& out) {
    out << "position,label,cluster_start";
    for (auto k : r.ranks) out << ",u" << k;
    out << '\n';
    for (std::size_t pos = 0; pos < r.order.size(); ++pos) {
        const bool start = std::find(r.block_starts.begin(), r.block_starts.end(), pos) != r.block_starts.end();
        out << pos << ',' << labels[r.order[pos]] << ',' << (start ? 1 : 0);
        for (Eigen::Index c = 0; c < r.components.cols(); ++c) {
            out << ',' << format_number(r.components(static_cast<Eigen::Index>(pos), c));
        }
        out << '\n';
    }
}

void write_eigenportfolios_csv(std::span<const Date> dates, std::span<const Eigenportfolio> ports,
                               const Eigen::VectorXd& mean_return, std::ostream& out) {
    out << "date,mean_return";
    for (const auto& p : ports) out << ",R" << p.k;
    out << '\n';
    for (std::size_t t = 0; t < dates.size(); ++t) {
        out << dates[t].iso() << ',' << format_number(mean_return(static_cast<Eigen::Index>(t)));
        for (const auto& p : ports) out << ',' << format_number(p.returns(static_cast<Eigen::Index>(t)));
        out << '\n';
    }
}

void write_index_csv(std::span<const Date> dates, const BuyAndHoldReport& report,
                     const IndexSeries& benchmark, std::ostream& out) {
    out << "date,index,average_price,uniform_benchmark\n";
    for (std::size_t t = 0; t < dates.size(); ++t) {
        const auto i = static_cast<Eigen::Index>(t);
        out << dates[t].iso() << ',' << format_number(report.index(i)) << ','
            << format_number(report.average_price(i)) << ',' << format_number(benchmark.values(i)) << '\n';
    }
}

}  // namespace corrstruct::report

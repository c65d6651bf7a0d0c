#include "corrstruct/correlation.hpp"

#include "corrstruct/error.hpp"
#include "corrstruct/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace corrstruct {

CorrelationMatrix correlation_matrix(const Eigen::MatrixXd& g, std::vector<std::string> labels,
                                     unsigned threads) {
    if (g.rows() < 2) throw InputError("correlation needs at least 2 time samples");
    const Eigen::Index n = g.cols();
    if (labels.empty()) labels = default_labels(static_cast<std::size_t>(n));
    if (labels.size() != static_cast<std::size_t>(n)) {
        throw InputError("label count does not match the number of series");
    }

    CorrelationMatrix out;
    out.labels = std::move(labels);
    out.t_effective = static_cast<std::size_t>(g.rows());
    out.values.resize(n, n);
    const double inv_t = 1.0 / static_cast<double>(g.rows());

    auto fill_columns = [&](Eigen::Index begin, Eigen::Index stride) {
        for (Eigen::Index j = begin; j < n; j += stride) {
            out.values(j, j) = 1.0;
            for (Eigen::Index i = 0; i < j; ++i) {
                const double c = g.col(i).dot(g.col(j)) * inv_t;
                out.values(i, j) = c;
                out.values(j, i) = c;
            }
        }
    };

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<Eigen::Index>(n, 1))));
    if (threads == 1) {
        fill_columns(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(fill_columns, w, threads);
        for (auto& th : pool) th.join();
    }
    return out;
}

double mean_offdiagonal(const Eigen::MatrixXd& c) {
    const Eigen::Index n = c.rows();
    if (n < 2) throw InputError("mean off-diagonal needs N >= 2");
    double sum = 0.0;
    for (Eigen::Index j = 1; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) sum += c(i, j);
    }
    return sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

std::vector<double> CoefficientHistogram::bin_centers() const {
    std::vector<double> centers;
    for (std::size_t k = 0; k + 1 < bin_edges.size(); ++k) {
        centers.push_back(0.5 * (bin_edges[k] + bin_edges[k + 1]));
    }
    return centers;
}

std::vector<std::size_t> find_peaks(std::span<const double> v, double min_prominence) {
    std::vector<std::size_t> peaks;
    const std::size_t n = v.size();
    auto at = [&](std::ptrdiff_t i) {
        return (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) ? 0.0 : v[static_cast<std::size_t>(i)];
    };
    std::size_t a = 0;
    while (a < n) {
        std::size_t b = a;
        while (b + 1 < n && v[b + 1] == v[a]) ++b;
        const double h = v[a];
        const auto ia = static_cast<std::ptrdiff_t>(a);
        const auto ib = static_cast<std::ptrdiff_t>(b);
        if (h > 0.0 && at(ia - 1) < h && at(ib + 1) < h) {
            double left_min = h;
            std::ptrdiff_t i = ia - 1;
            for (; i >= 0 && v[static_cast<std::size_t>(i)] <= h; --i) {
                left_min = std::min(left_min, v[static_cast<std::size_t>(i)]);
            }
            if (i < 0) left_min = 0.0;
            double right_min = h;
            i = ib + 1;
            for (; i < static_cast<std::ptrdiff_t>(n) && v[static_cast<std::size_t>(i)] <= h; ++i) {
                right_min = std::min(right_min, v[static_cast<std::size_t>(i)]);
            }
            if (i >= static_cast<std::ptrdiff_t>(n)) right_min = 0.0;
            if (h - std::max(left_min, right_min) >= min_prominence) peaks.push_back(a);
        }
        a = b + 1;
    }
    return peaks;
}

CoefficientHistogram coefficient_histogram(const CorrelationMatrix& c, std::size_t n_bins,
                                           double min_relative_prominence) {
    const std::size_t n = c.size();
    if (n < 2) throw InputError("histogram needs N >= 2");
    if (n_bins == 0) throw InputError("histogram needs at least one bin");

    CoefficientHistogram h;
    h.n_pairs = n * (n - 1) / 2;
    const double width = 2.0 / static_cast<double>(n_bins);
    for (std::size_t k = 0; k <= n_bins; ++k) {
        h.bin_edges.push_back(-1.0 + width * static_cast<double>(k));
    }
    h.bin_edges.back() = 1.0;

    std::vector<std::size_t> counts(n_bins, 0);
    for (std::size_t j = 1; j < n; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            const double x = std::clamp(c(i, j), -1.0, 1.0);
            auto bin = static_cast<std::size_t>(std::floor((x + 1.0) / width));
            counts[std::min(bin, n_bins - 1)] += 1;
        }
    }
    const double norm = 1.0 / (static_cast<double>(h.n_pairs) * width);
    for (auto cnt : counts) h.densities.push_back(static_cast<double>(cnt) * norm);

    const double peak_max = *std::max_element(h.densities.begin(), h.densities.end());
    h.peak_bins = find_peaks(h.densities, min_relative_prominence * peak_max);
    return h;
}

}  // namespace corrstruct

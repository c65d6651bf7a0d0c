#include "corrstruct/portfolio.hpp"

#include "corrstruct/error.hpp"

#include <cmath>

namespace corrstruct {

namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

Eigenportfolio from_weights(Eigen::VectorXd weights, const ReturnPanel& panel, ReturnBasis basis,
                            std::size_t k) {
    const Eigen::MatrixXd x = basis == ReturnBasis::Raw ? panel.returns : standardize(panel);
    Eigenportfolio p;
    p.k = k;
    p.weights = std::move(weights);
    p.returns = x * p.weights;
    const Eigen::VectorXd mean = cross_sectional_mean(x);
    p.r_squared = r_squared(as_span(p.returns), as_span(mean));
    return p;
}

}  // namespace

Eigen::VectorXd cross_sectional_mean(const Eigen::MatrixXd& returns) {
    return returns.rowwise().mean();
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("series lengths differ");
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double r_squared(std::span<const double> x, std::span<const double> y) {
    // Simple regression with intercept: R^2 is the squared Pearson correlation.
    const double r = pearson(x, y);
    return r * r;
}

Eigenportfolio eigenportfolio(const SpectralDecomposition& d, const ReturnPanel& returns,
                              std::size_t k, ReturnBasis basis) {
    const std::size_t n = d.size();
    if (k < 1 || k > n) throw InputError("eigenportfolio index out of range");
    if (returns.n_series() != n) throw InputError("return panel and spectrum sizes differ");
    const Eigen::VectorXd u = d.vector(k);
    const double total = u.sum();
    if (std::abs(total) < 1e-8) {
        throw NumericalError("eigenportfolio " + std::to_string(k) +
                             " is ill-defined: eigenvector components sum to ~0");
    }
    return from_weights(u / total, returns, basis, k);
}

Eigenportfolio uniform_portfolio(const ReturnPanel& returns, ReturnBasis basis) {
    const auto n = static_cast<Eigen::Index>(returns.n_series());
    return from_weights(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), returns, basis,
                        0);
}

IndexSeries build_index(const Eigenportfolio& p, double base) {
    if (!(base > 0.0)) throw InputError("index base must be positive");
    IndexSeries idx;
    idx.base = base;
    idx.portfolio_k = p.k;
    idx.values.resize(p.returns.size() + 1);
    idx.values(0) = base;
    double cumulative = 0.0;
    for (Eigen::Index t = 0; t < p.returns.size(); ++t) {
        cumulative += p.returns(t);
        idx.values(t + 1) = base * std::exp(cumulative);
    }
    return idx;
}

Eigen::VectorXd average_price(const PricePanel& panel) {
    return panel.prices.rowwise().mean();
}

BuyAndHoldReport buy_and_hold_report(const IndexSeries& index,
                                     std::span<const double> avg_price) {
    const auto n = static_cast<std::size_t>(index.values.size());
    if (avg_price.size() != n) {
        throw InputError("index and average price have different lengths (" + std::to_string(n) +
                         " vs " + std::to_string(avg_price.size()) + ")");
    }
    if (n == 0) throw InputError("empty index series");
    BuyAndHoldReport r;
    r.index = index.values;
    r.average_price = Eigen::Map<const Eigen::VectorXd>(avg_price.data(), static_cast<Eigen::Index>(n));
    r.terminal_ratio = r.index(static_cast<Eigen::Index>(n - 1)) /
                       r.average_price(static_cast<Eigen::Index>(n - 1));
    std::size_t wins = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (r.index(static_cast<Eigen::Index>(t)) >= r.average_price(static_cast<Eigen::Index>(t))) {
            ++wins;
        }
    }
    r.dominance_fraction = static_cast<double>(wins) / static_cast<double>(n);
    const Eigen::VectorXd li = r.index.array().log().matrix();
    const Eigen::VectorXd lp = r.average_price.array().log().matrix();
    r.log_correlation = pearson(as_span(li), as_span(lp));
    return r;
}

BuyAndHoldReport buy_and_hold_report(const IndexSeries& index, const PricePanel& panel) {
    const Eigen::VectorXd avg = average_price(panel);
    return buy_and_hold_report(index, as_span(avg));
}

}  // namespace corrstruct

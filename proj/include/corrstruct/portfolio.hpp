#pragma once

// Eigenportfolios, the market index compounded from the leading one, and the
// buy-and-hold comparison against the average price.

#include "corrstruct/ingest.hpp"
#include "corrstruct/spectra.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace corrstruct {

enum class ReturnBasis {
    Raw,           ///< log-returns r_i(t)
    Standardized,  ///< g_i(t)
};

struct Eigenportfolio {
    std::size_t k = 0;        ///< eigenvector rank; 0 for the uniform 1/N portfolio
    Eigen::VectorXd weights;  ///< sums to 1
    Eigen::VectorXd returns;  ///< R_k(t)
    double r_squared = 0.0;   ///< OLS of the cross-sectional mean return on R_k
};

/// Weights u_k / sum_i u_ik. Throws NumericalError when the component sum is
/// within 1e-8 of zero.
Eigenportfolio eigenportfolio(const SpectralDecomposition& d, const ReturnPanel& returns,
                              std::size_t k, ReturnBasis basis = ReturnBasis::Raw);

/// The 1/N benchmark expressed with the same formula.
Eigenportfolio uniform_portfolio(const ReturnPanel& returns, ReturnBasis basis = ReturnBasis::Raw);

/// <r(t)> = mean over series at each time.
Eigen::VectorXd cross_sectional_mean(const Eigen::MatrixXd& returns);

/// Coefficient of determination of an OLS fit (with intercept) of y on x.
/// Zero when either series is constant.
double r_squared(std::span<const double> x, std::span<const double> y);

/// Pearson correlation; zero when either series is constant.
double pearson(std::span<const double> x, std::span<const double> y);

struct IndexSeries {
    double base = 0.0;
    Eigen::VectorXd values;  ///< length T + 1, values(0) == base
    std::size_t portfolio_k = 1;
};

/// I(t) = base * exp(sum_{s <= t} R_k(s)). Throws InputError for base <= 0.
IndexSeries build_index(const Eigenportfolio& p, double base);

/// <P(t)> across series.
Eigen::VectorXd average_price(const PricePanel& panel);

struct BuyAndHoldReport {
    Eigen::VectorXd index;
    Eigen::VectorXd average_price;
    double terminal_ratio = 0.0;      ///< I(T) / <P(T)>
    double dominance_fraction = 0.0;  ///< share of dates with I(t) >= <P(t)>
    double log_correlation = 0.0;     ///< corr(ln I, ln <P>)
};

/// Throws InputError when the series lengths differ.
BuyAndHoldReport buy_and_hold_report(const IndexSeries& index,
                                     std::span<const double> average_price);
BuyAndHoldReport buy_and_hold_report(const IndexSeries& index, const PricePanel& panel);

}  // namespace corrstruct

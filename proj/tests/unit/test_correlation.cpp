#include "corrstruct/correlation.hpp"
#include "corrstruct/error.hpp"
#include "corrstruct/ingest.hpp"
#include "corrstruct/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>

using namespace corrstruct;

namespace {

CorrelationMatrix wrap(Eigen::MatrixXd m) {
    CorrelationMatrix c;
    c.values = std::move(m);
    c.labels = default_labels(static_cast<std::size_t>(c.values.rows()));
    c.t_effective = 1000;
    return c;
}

}  // namespace

TEST_CASE("identical and mirrored series give +1 and -1") {
    Eigen::MatrixXd x(6, 3);
    x.col(0) << 0.1, -0.4, 0.3, 0.2, -0.1, 0.5;
    x.col(1) = x.col(0);
    x.col(2) = -x.col(0);
    const auto c = correlation_matrix(standardize_columns(x));
    CHECK(c(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(c(0, 2) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(c(1, 1) == 1.0);
    CHECK(c.t_effective == 6);
    CHECK(c.labels[0] == "S1");
}

TEST_CASE("pearson of (1,2,3,4) and (1,2,4,3) matches the frozen reference") {
    Eigen::MatrixXd x(4, 2);
    x.col(0) << 1, 2, 3, 4;
    x.col(1) << 1, 2, 4, 3;
    const auto c = correlation_matrix(standardize_columns(x));
    CHECK(std::abs(c(0, 1) - 0.8) < 1e-12);
}

TEST_CASE("correlation matrix is symmetric, unit diagonal and thread independent") {
    const Eigen::MatrixXd g = generate_noise_panel(300, 17, 5);
    const auto c1 = correlation_matrix(g, {}, 1);
    const auto c4 = correlation_matrix(g, {}, 4);
    CHECK(c1.values == c4.values);
    CHECK(c1.values == c1.values.transpose());
    for (Eigen::Index i = 0; i < 17; ++i) CHECK(c1(i, i) == 1.0);
    CHECK(c1.values.cwiseAbs().maxCoeff() <= 1.0);
    const Eigen::MatrixXd direct = g.transpose() * g / 300.0;
    CHECK((direct - c1.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("correlation errors") {
    CHECK_THROWS_AS(correlation_matrix(Eigen::MatrixXd::Ones(1, 3)), InputError);
    CHECK_THROWS_AS(correlation_matrix(Eigen::MatrixXd::Ones(5, 3), {"a", "b"}), InputError);
}

TEST_CASE("mean off-diagonal correlation") {
    CHECK(mean_offdiagonal(Eigen::MatrixXd::Identity(5, 5)) == 0.0);
    CHECK(mean_offdiagonal(oracle::equicorrelated(71, 0.57)) == doctest::Approx(0.57).epsilon(1e-14));
    const Eigen::MatrixXd b = oracle::block_matrix({3, 3}, 0.9, 0.1);
    CHECK(mean_offdiagonal(b) == doctest::Approx(0.42).epsilon(1e-14));
    CHECK(mean_offdiagonal(b) == doctest::Approx(oracle::mean_offdiag(b)).epsilon(1e-14));
}

TEST_CASE("histogram of an equicorrelated matrix has one occupied bin") {
    const auto h = coefficient_histogram(wrap(oracle::equicorrelated(10, 0.57)));
    CHECK(h.n_pairs == 45);
    CHECK(h.densities.size() == kDefaultHistogramBins);
    CHECK(std::count_if(h.densities.begin(), h.densities.end(), [](double d) { return d > 0; }) == 1);
    CHECK(h.peak_count() == 1);
    double mass = 0.0;
    for (std::size_t b = 0; b < h.densities.size(); ++b) mass += h.densities[b] * (h.bin_edges[b + 1] - h.bin_edges[b]);
    CHECK(mass == doctest::Approx(1.0));
}

TEST_CASE("two-block matrix gives exactly two peaks") {
    const auto h = coefficient_histogram(wrap(oracle::block_matrix({3, 3}, 0.9, 0.1)));
    CHECK(h.peak_count() == 2);
    const auto centers = h.bin_centers();
    CHECK(centers[h.peak_bins[0]] == doctest::Approx(0.1).epsilon(0.05));
    CHECK(centers[h.peak_bins[1]] == doctest::Approx(0.9).epsilon(0.05));
}

TEST_CASE("coefficients of +1 and -1 land in the end bins") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
    m(0, 1) = m(1, 0) = 1.0;
    m(0, 2) = m(2, 0) = -1.0;
    m(1, 2) = m(2, 1) = -1.0;
    const auto h = coefficient_histogram(wrap(m), 10);
    CHECK(h.densities.front() > 0.0);
    CHECK(h.densities.back() > 0.0);
}

TEST_CASE("planted six-block panel produces a multimodal coefficient histogram") {
    const std::size_t high[] = {2, 3, 4};
    const auto spec = two_level_block_spec({10, 7, 10, 5, 28, 7}, 0.9, high, 0.55, 0.25, 5000, 11);
    const auto panel = generate_block_panel(spec);
    const auto c = correlation_matrix(standardize_columns(panel.returns));
    CHECK(coefficient_histogram(c).peak_count() >= 2);
}

TEST_CASE("peak finder uses topographic prominence") {
    const std::vector<double> v{0, 1, 0.95, 1.2, 0, 0.3, 0.3, 0, 0.01};
    const auto peaks = find_peaks(v, 0.1);
    CHECK(peaks == std::vector<std::size_t>{3, 5});
    CHECK(find_peaks(v, 0.0).size() == 4);
    CHECK(find_peaks(std::vector<double>{2, 1, 0}, 0.5) == std::vector<std::size_t>{0});
}

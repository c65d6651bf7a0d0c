#include "corrstruct/error.hpp"
#include "corrstruct/ingest.hpp"
#include "corrstruct/spectra.hpp"
#include "corrstruct/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace corrstruct;

namespace {

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

CorrelationMatrix wrap(Eigen::MatrixXd m, std::size_t t) {
    CorrelationMatrix c;
    c.values = std::move(m);
    c.labels = default_labels(static_cast<std::size_t>(c.values.rows()));
    c.t_effective = t;
    return c;
}

double trapezoid(const MPBounds& b, int n) {
    // substitution lambda = mid + half*sin(theta) removes the endpoint square roots
    const double mid = 0.5 * (b.lambda_max + b.lambda_min);
    const double half = 0.5 * (b.lambda_max - b.lambda_min);
    const double pi = std::acos(-1.0);
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double th = -pi / 2 + pi * k / n;
        const double w = (k == 0 || k == n) ? 0.5 : 1.0;
        s += w * mp_density(mid + half * std::sin(th), b) * half * std::cos(th);
    }
    return s * pi / n;
}

}  // namespace

TEST_CASE("bounds for T=5272, N=71") {
    const auto b = mp_bounds(5272, 71);
    CHECK(b.q == doctest::Approx(5272.0 / 71.0));
    CHECK(std::abs(b.lambda_max - 1.2456) < 1e-3);
    CHECK(std::abs(b.lambda_min - 0.7814) < 1e-3);
}

TEST_CASE("bounds in closed form") {
    const auto one = mp_bounds_for_ratio(1.0);
    CHECK(one.lambda_min == doctest::Approx(0.0));
    CHECK(one.lambda_max == doctest::Approx(4.0));
    const auto four = mp_bounds_for_ratio(4.0, 2.0);
    CHECK(four.lambda_min == doctest::Approx(0.5));
    CHECK(four.lambda_max == doctest::Approx(4.5));
    CHECK_THROWS_AS(mp_bounds(50, 71), InputError);
    CHECK_THROWS_AS(mp_bounds(50, 1), InputError);
    CHECK_THROWS_AS(mp_bounds_for_ratio(0.5), InputError);
    CHECK_THROWS_AS(mp_bounds_for_ratio(2.0, 0.0), InputError);
}

TEST_CASE("density vanishes at the edges and outside, integrates to one") {
    for (double q : {1.5, 4.0, 5272.0 / 71.0}) {
        const auto b = mp_bounds_for_ratio(q, q == 4.0 ? 2.0 : 1.0);
        CHECK(mp_density(b.lambda_min, b) == doctest::Approx(0.0));
        CHECK(mp_density(b.lambda_max, b) == doctest::Approx(0.0));
        CHECK(mp_density(b.lambda_max + 0.1, b) == 0.0);
        CHECK(mp_density(b.lambda_min * 0.5, b) == 0.0);
        CHECK(std::abs(trapezoid(b, 20000) - 1.0) < 1e-6);
        CHECK(mp_cdf(b.lambda_min, b) == 0.0);
        CHECK(mp_cdf(b.lambda_max, b) == 1.0);
    }
}

TEST_CASE("density and CDF match the frozen reference values") {
    const auto b = mp_bounds_for_ratio(74.3);
    CHECK(mp_density(1.0, b) == doctest::Approx(2.7391300897757871871).epsilon(1e-12));
    CHECK(mp_cdf(1.0, b) == doctest::Approx(0.51231347769581707253).epsilon(1e-9));
    const auto b2 = mp_bounds_for_ratio(4.0, 2.0);
    CHECK(mp_cdf(1.1, b2) == doctest::Approx(0.22812440859787933012).epsilon(1e-9));
}

TEST_CASE("CDF is monotone") {
    const auto b = mp_bounds_for_ratio(3.0);
    double prev = -1.0;
    for (int k = 0; k <= 100; ++k) {
        const double x = b.lambda_min + (b.lambda_max - b.lambda_min) * k / 100.0;
        const double f = mp_cdf(x, b);
        CHECK(f >= prev);
        prev = f;
    }
}

TEST_CASE("2x2 matrix has eigenvalues 1 +- c") {
    Eigen::MatrixXd m(2, 2);
    m << 1, 0.3, 0.3, 1;
    const auto d = eigendecompose(m, mp_bounds_for_ratio(100));
    CHECK(d.eigenvalues(0) == doctest::Approx(1.3));
    CHECK(d.eigenvalues(1) == doctest::Approx(0.7));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(d.vector(1)(0) == doctest::Approx(r));
    CHECK(d.vector(1)(1) == doctest::Approx(r));
    CHECK(std::abs(d.vector(2)(0)) == doctest::Approx(r));
    CHECK(d.vector(2)(0) * d.vector(2)(1) == doctest::Approx(-0.5));
}

TEST_CASE("identity matrix is all bulk") {
    const auto d = eigendecompose(Eigen::MatrixXd::Identity(71, 71), mp_bounds(5272, 71));
    const auto rep = bulk_deviation_report(d);
    CHECK(rep.above == 0);
    CHECK(rep.bulk == 71);
    CHECK(rep.below == 0);
    CHECK(rep.explained_variance == doctest::Approx(1.0 / 71.0));
}

TEST_CASE("equicorrelated spectrum in closed form") {
    const auto d = eigendecompose(oracle::equicorrelated(71, 0.57), mp_bounds(5272, 71));
    CHECK(std::abs(d.eigenvalues(0) - 40.9) < 1e-8);
    for (Eigen::Index k = 1; k < 71; ++k) CHECK(std::abs(d.eigenvalues(k) - 0.43) < 1e-8);
    for (Eigen::Index i = 0; i < 71; ++i) CHECK(d.vector(1)(i) == doctest::Approx(1.0 / std::sqrt(71.0)));
    const auto rep = bulk_deviation_report(d);
    CHECK(rep.above == 1);
    CHECK(rep.below == 70);
    CHECK(rep.explained_variance == doctest::Approx(40.9 / 71.0));
}

TEST_CASE("decomposition is orthonormal, sorted and sign-fixed") {
    const Eigen::MatrixXd m = random_correlation_matrix(12, 3);
    const auto d = eigendecompose(m, mp_bounds_for_ratio(10));
    const Eigen::MatrixXd& u = d.eigenvectors;
    CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((u * d.eigenvalues.asDiagonal() * u.transpose() - m).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index k = 1; k < 12; ++k) CHECK(d.eigenvalues(k - 1) >= d.eigenvalues(k));
    for (Eigen::Index k = 0; k < 12; ++k) {
        Eigen::Index imax = 0;
        u.col(k).cwiseAbs().maxCoeff(&imax);
        CHECK(u(imax, k) > 0.0);
    }
    Eigen::MatrixXd bad = m;
    bad(0, 1) += 0.1;
    CHECK_THROWS_AS(eigendecompose(bad, mp_bounds_for_ratio(10)), NumericalError);
}

TEST_CASE("noise panel follows the MP law") {
    const Eigen::MatrixXd g = generate_noise_panel(5000, 70, 1);
    const auto c = correlation_matrix(g);
    const auto b = mp_bounds(5000, 70);
    const auto d = eigendecompose(c, b);
    const auto ev = as_vector(d.eigenvalues);
    CHECK(mp_kolmogorov_distance(ev, b) < 0.05);
    CHECK(fraction_outside_bulk(ev, b) < 0.02);
}

TEST_CASE("Kolmogorov distance of a point mass is large") {
    const auto b = mp_bounds_for_ratio(4.0);
    const std::vector<double> ev(20, 1.0);
    CHECK(mp_kolmogorov_distance(ev, b) > 0.3);
    CHECK(fraction_outside_bulk(std::vector<double>{0.1, 1.0, 9.0, 1.2}, b) == doctest::Approx(0.5));
}

TEST_CASE("classification against the bulk") {
    const auto b = mp_bounds_for_ratio(4.0);
    CHECK(classify(5.0, b) == EigenClass::Above);
    CHECK(classify(1.0, b) == EigenClass::Bulk);
    CHECK(classify(0.1, b) == EigenClass::Below);
    CHECK(std::string(to_string(EigenClass::Bulk)) == "bulk");
}

TEST_CASE("planted near-duplicate pair localizes in the smallest eigenvector") {
    const auto panel = generate_duplicate_pair_panel(71, 5272, 0.999, 4);
    const auto c = correlation_matrix(standardize_columns(panel.returns));
    const auto d = eigendecompose(c, mp_bounds(5272, 71));
    const auto locs = localize_pairs(d, c, 1);
    REQUIRE(locs.size() == 1);
    CHECK(locs[0].rank == 71);
    REQUIRE(locs[0].dominant.size() == 2);
    const auto& p = panel.pairs.at(0);
    const std::size_t a = std::min(locs[0].dominant[0].series, locs[0].dominant[1].series);
    const std::size_t b = std::max(locs[0].dominant[0].series, locs[0].dominant[1].series);
    CHECK(a == p.first);
    CHECK(b == p.second);
    CHECK(locs[0].dominant[0].value * locs[0].dominant[1].value < 0.0);
    REQUIRE(!locs[0].pairs.empty());
    CHECK(std::min(locs[0].pairs[0].first, locs[0].pairs[0].second) == p.first);
    CHECK(std::max(locs[0].pairs[0].first, locs[0].pairs[0].second) == p.second);

    // the implied pair carries the largest off-diagonal coefficient
    Eigen::MatrixXd off = c.values;
    off.diagonal().setConstant(-2.0);
    Eigen::Index mi = 0, mj = 0;
    off.maxCoeff(&mi, &mj);
    CHECK(std::min<std::size_t>(mi, mj) == p.first);
    CHECK(std::max<std::size_t>(mi, mj) == p.second);
}

TEST_CASE("two planted pairs localize separately") {
    DuplicatePairSpec spec;
    spec.pair_correlations = {0.999, 0.995};
    spec.seed = 9;
    const auto panel = generate_duplicate_pair_panel(spec);
    const auto c = correlation_matrix(standardize_columns(panel.returns));
    const auto d = eigendecompose(c, mp_bounds(spec.t, spec.n));
    const auto locs = localize_pairs(d, c, 2);
    REQUIRE(locs.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        REQUIRE(locs[k].dominant.size() == 2);
        const std::size_t a = std::min(locs[k].dominant[0].series, locs[k].dominant[1].series);
        const std::size_t b = std::max(locs[k].dominant[0].series, locs[k].dominant[1].series);
        CHECK(a == panel.pairs[k].first);
        CHECK(b == panel.pairs[k].second);
    }
}

TEST_CASE("identity matrix yields no dominant opposite-sign pairs") {
    const auto c = wrap(Eigen::MatrixXd::Identity(8, 8), 800);
    const auto d = eigendecompose(c, mp_bounds(800, 8));
    for (const auto& loc : localize_pairs(d, c, 3)) {
        bool opposite = false;
        for (std::size_t x = 0; x < loc.dominant.size(); ++x)
            for (std::size_t y = x + 1; y < loc.dominant.size(); ++y)
                opposite |= loc.dominant[x].value * loc.dominant[y].value < 0.0;
        CHECK_FALSE(opposite);
    }
}

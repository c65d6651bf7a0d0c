#include "corrstruct/spectra.hpp"

#include "corrstruct/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace corrstruct {

MPBounds mp_bounds_for_ratio(double q, double sigma2) {
    if (!(q >= 1.0)) throw InputError("Marchenko-Pastur bounds need Q = T/N >= 1");
    if (!(sigma2 > 0.0)) throw InputError("Marchenko-Pastur bounds need sigma2 > 0");
    MPBounds b;
    b.q = q;
    b.sigma2 = sigma2;
    const double root = 2.0 * std::sqrt(1.0 / q);
    b.lambda_min = sigma2 * std::max(0.0, 1.0 + 1.0 / q - root);
    b.lambda_max = sigma2 * (1.0 + 1.0 / q + root);
    return b;
}

MPBounds mp_bounds(std::size_t t, std::size_t n, double sigma2) {
    if (n < 2) throw InputError("Marchenko-Pastur bounds need N >= 2");
    if (t < n) throw InputError("Marchenko-Pastur bounds need T >= N");
    return mp_bounds_for_ratio(static_cast<double>(t) / static_cast<double>(n), sigma2);
}

double mp_density(double lambda, const MPBounds& b) {
    if (lambda <= b.lambda_min || lambda >= b.lambda_max) return 0.0;
    return b.q / (2.0 * std::numbers::pi * b.sigma2) *
           std::sqrt((b.lambda_max - lambda) * (lambda - b.lambda_min)) / lambda;
}

double mp_cdf(double lambda, const MPBounds& b) {
    if (lambda <= b.lambda_min) return 0.0;
    if (lambda >= b.lambda_max) return 1.0;
    // lambda = a + (b - a)(1 - cos u)/2 removes the square-root endpoint
    // singularities, leaving a smooth integrand for composite Simpson.
    const double lo = b.lambda_min, hi = b.lambda_max;
    const double half = 0.5 * (hi - lo);
    const double u_end = std::acos(std::clamp(1.0 - (lambda - lo) / half, -1.0, 1.0));
    const double scale = b.q / (2.0 * std::numbers::pi * b.sigma2) * half * half;
    auto f = [&](double u) {
        const double s = std::sin(u);
        const double x = lo + half * (1.0 - std::cos(u));
        return x > 0.0 ? scale * s * s / x : 0.0;
    };
    constexpr int intervals = 2048;
    const double h = u_end / intervals;
    double acc = f(0.0) + f(u_end);
    for (int i = 1; i < intervals; ++i) acc += f(h * i) * (i % 2 == 1 ? 4.0 : 2.0);
    return std::clamp(acc * h / 3.0, 0.0, 1.0);
}

double mp_kolmogorov_distance(std::span<const double> eigenvalues, const MPBounds& bounds) {
    std::vector<double> sorted(eigenvalues.begin(), eigenvalues.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = mp_cdf(sorted[i], bounds);
        worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - f),
                          std::abs(static_cast<double>(i) / n - f)});
    }
    return worst;
}

double fraction_outside_bulk(std::span<const double> eigenvalues, const MPBounds& bounds) {
    if (eigenvalues.empty()) return 0.0;
    const auto outside = std::count_if(eigenvalues.begin(), eigenvalues.end(), [&](double x) {
        return x < bounds.lambda_min || x > bounds.lambda_max;
    });
    return static_cast<double>(outside) / static_cast<double>(eigenvalues.size());
}

const char* to_string(EigenClass cls) {
    switch (cls) {
        case EigenClass::Above: return "above";
        case EigenClass::Bulk: return "bulk";
        case EigenClass::Below: return "below";
    }
    return "bulk";
}

EigenClass classify(double lambda, const MPBounds& bounds) {
    if (lambda > bounds.lambda_max) return EigenClass::Above;
    if (lambda < bounds.lambda_min) return EigenClass::Below;
    return EigenClass::Bulk;
}

SpectralDecomposition eigendecompose(const Eigen::MatrixXd& c, const MPBounds& bounds) {
    if (c.rows() != c.cols() || c.rows() == 0) {
        throw NumericalError("eigendecomposition needs a non-empty square matrix");
    }
    const double asym = (c - c.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= 1e-12)) throw NumericalError("eigendecomposition needs a symmetric matrix");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");

    const Eigen::Index n = c.rows();
    // Solver order is ascending; a stable sort keeps degenerate eigenvalues in
    // the solver's index order.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const auto& vals = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return vals(a) > vals(b); });

    SpectralDecomposition d;
    d.bounds = bounds;
    d.eigenvalues.resize(n);
    d.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        d.eigenvalues(k) = vals(src);
        Eigen::VectorXd u = solver.eigenvectors().col(src);
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < n; ++i) {
            if (std::abs(u(i)) > std::abs(u(arg))) arg = i;
        }
        if (u(arg) < 0.0) u = -u;
        d.eigenvectors.col(k) = u;
        d.classes.push_back(classify(vals(src), bounds));
    }
    return d;
}

BulkDeviation bulk_deviation_report(const SpectralDecomposition& d) {
    BulkDeviation r;
    for (auto cls : d.classes) {
        switch (cls) {
            case EigenClass::Above: ++r.above; break;
            case EigenClass::Bulk: ++r.bulk; break;
            case EigenClass::Below: ++r.below; break;
        }
    }
    if (d.size() > 0) r.explained_variance = d.eigenvalues(0) / static_cast<double>(d.size());
    return r;
}

std::vector<PairLocalization> localize_pairs(const SpectralDecomposition& d,
                                             const CorrelationMatrix& c, std::size_t k_smallest,
                                             double dominance) {
    const std::size_t n = d.size();
    if (k_smallest > n) throw InputError("k_smallest exceeds the number of eigenvalues");
    if (c.size() != n) throw InputError("correlation matrix and spectrum sizes differ");

    std::vector<PairLocalization> out;
    for (std::size_t m = 0; m < k_smallest; ++m) {
        PairLocalization loc;
        loc.rank = n - m;
        const auto col = static_cast<Eigen::Index>(loc.rank - 1);
        loc.eigenvalue = d.eigenvalues(col);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = d.eigenvectors(static_cast<Eigen::Index>(i), col);
            if (std::abs(u) >= dominance) loc.dominant.push_back({i, u});
        }
        std::stable_sort(loc.dominant.begin(), loc.dominant.end(),
                         [](const DominantComponent& a, const DominantComponent& b) {
                             return std::abs(a.value) > std::abs(b.value);
                         });
        std::vector<std::pair<double, ImpliedPair>> ranked;
        for (std::size_t a = 0; a < loc.dominant.size(); ++a) {
            for (std::size_t b = a + 1; b < loc.dominant.size(); ++b) {
                const auto& x = loc.dominant[a];
                const auto& y = loc.dominant[b];
                if (x.value * y.value >= 0.0) continue;
                const std::size_t i = std::min(x.series, y.series);
                const std::size_t j = std::max(x.series, y.series);
                ranked.push_back({std::abs(x.value * y.value), ImpliedPair{i, j, c(i, j)}});
            }
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (auto& [w, p] : ranked) loc.pairs.push_back(p);
        out.push_back(std::move(loc));
    }
    return out;
}

}  // namespace corrstruct

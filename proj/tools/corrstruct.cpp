// corrstruct: command-line driver. Every stage reads and writes plain files so
// it can be rerun on its own; `pipeline` chains them and adds a manifest.

#include "corrstruct/correlation.hpp"
#include "corrstruct/error.hpp"
#include "corrstruct/ingest.hpp"
#include "corrstruct/portfolio.hpp"
#include "corrstruct/report.hpp"
#include "corrstruct/seriation.hpp"
#include "corrstruct/spectra.hpp"
#include "corrstruct/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace corrstruct;
using report::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNotConverged = 4;
constexpr int kSchemaVersion = 1;

struct Options {
    std::string input;
    std::string layout = "wide";
    bool no_trim = false;
    int delta_t = 1;
    double clip = kDefaultClipThreshold;

    std::string returns_path;
    std::string correlation_path;
    std::string prices_path;
    std::size_t bins = kDefaultHistogramBins;

    double sigma2 = 1.0;
    std::size_t k_smallest = 3;
    double dominance = kDefaultDominance;

    std::optional<std::uint64_t> seed;
    std::size_t n_runs = 200;
    double gamma = 1.0;
    std::size_t max_iterations = 50;
    AnnealingConfig anneal;

    std::vector<std::size_t> portfolios{1, 2, 3};
    std::string basis = "raw";
    std::size_t index_k = 1;
    std::optional<double> base;

    std::string scenario;
    std::size_t synth_t = 0;
    std::size_t synth_n = 0;

    std::string out = ".";
    unsigned threads = 1;
    bool strict = false;
};

// Thrown for argument combinations the parser cannot express.
struct UsageError : InputError {
    using InputError::InputError;
};

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& fill) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    fill(out);
    if (!out) throw InputError("write to '" + path.string() + "' failed");
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

// A set of output files produced in memory and written only once the whole
// command has succeeded.
class Bundle {
public:
    void add(std::string name, const std::function<void(std::ostream&)>& fill) {
        std::ostringstream s;
        fill(s);
        files_.emplace_back(std::move(name), s.str());
    }
    void add_json(std::string name, const json& j) {
        files_.emplace_back(std::move(name), j.dump(2) + "\n");
    }
    void flush(const fs::path& dir) const {
        fs::create_directories(dir);
        for (const auto& [name, text] : files_) {
            write_file(dir / name, [&](std::ostream& o) { o << text; });
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

ReturnBasis parse_basis(const std::string& s) {
    if (s == "raw") return ReturnBasis::Raw;
    if (s == "standardized") return ReturnBasis::Standardized;
    throw UsageError("unknown basis '" + s + "' (raw|standardized)");
}

LoadOptions load_options(const Options& o) {
    LoadOptions lo;
    lo.trim_to_common_range = !o.no_trim;
    return lo;
}

ReturnPanel load_returns(const Options& o) {
    const fs::path csv = o.returns_path;
    const fs::path sidecar = fs::path(csv).replace_extension(".json");
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw InputError("cannot open '" + csv.string() + "'");
    json meta = fs::exists(sidecar) ? read_json(sidecar) : json::object();
    return report::read_returns(in, meta);
}

CorrelationMatrix load_correlation(const Options& o) {
    return report::correlation_from_json(read_json(o.correlation_path));
}

ConsensusConfig consensus_config(const Options& o) {
    ConsensusConfig cc;
    cc.n_runs = o.n_runs;
    cc.anneal = o.anneal;
    cc.gamma = o.gamma;
    cc.max_iterations = o.max_iterations;
    cc.threads = o.threads;
    return cc;
}

void validate(const Options& o) {
    if (o.delta_t < 1) throw UsageError("--delta-t must be >= 1");
    if (!(o.clip > 0.0)) throw UsageError("--clip must be positive");
    if (o.n_runs < 1) throw UsageError("--n-runs must be >= 1");
    if (!(o.gamma >= 0.0)) throw UsageError("--gamma must be >= 0");
    if (!(o.anneal.cooling > 0.0 && o.anneal.cooling < 1.0)) throw UsageError("--cooling must be in (0, 1)");
    if (!(o.anneal.initial_acceptance > 0.0 && o.anneal.initial_acceptance < 1.0)) {
        throw UsageError("--initial-acceptance must be in (0, 1)");
    }
    if (o.anneal.moves_per_temperature < 1) throw UsageError("--moves must be >= 1");
    if (!(o.dominance > 0.0 && o.dominance <= 1.0)) throw UsageError("--dominance must be in (0, 1]");
    if (o.threads < 1) throw UsageError("--threads must be >= 1");
}

// Daily log returns for compounding; the spectrum may come from a coarser
// horizon but an index is built one step at a time.
struct IndexBundle {
    BuyAndHoldReport report;
    IndexSeries benchmark;
    double base = 0.0;
};

IndexBundle make_index(const PricePanel& prices, const SpectralDecomposition& d, std::size_t k,
                       std::optional<double> base, double clip) {
    const ReturnPanel daily = compute_returns(prices, 1, clip);
    const Eigen::VectorXd avg = average_price(prices);
    const double b = base.value_or(avg(0));
    IndexBundle out;
    out.base = b;
    out.report = buy_and_hold_report(build_index(eigenportfolio(d, daily, k, ReturnBasis::Raw), b), prices);
    out.benchmark = build_index(uniform_portfolio(daily, ReturnBasis::Raw), b);
    return out;
}

json index_json(const IndexBundle& ib, std::size_t k) {
    return json{{"portfolio", k},
                {"base", ib.base},
                {"terminal_ratio", ib.report.terminal_ratio},
                {"dominance_fraction", ib.report.dominance_fraction},
                {"log_correlation", ib.report.log_correlation}};
}

json portfolios_json(std::span<const Eigenportfolio> ports, std::span<const std::string> labels,
                     const std::string& basis) {
    json arr = json::array();
    for (const auto& p : ports) {
        json w = json::object();
        for (std::size_t i = 0; i < labels.size(); ++i) w[labels[i]] = p.weights(static_cast<Eigen::Index>(i));
        arr.push_back({{"k", p.k}, {"r_squared", p.r_squared}, {"weights", w}});
    }
    return json{{"basis", basis}, {"portfolios", arr}};
}

std::vector<Eigenportfolio> make_portfolios(const SpectralDecomposition& d, const ReturnPanel& r,
                                            const Options& o) {
    std::vector<Eigenportfolio> ports;
    for (auto k : o.portfolios) ports.push_back(eigenportfolio(d, r, k, parse_basis(o.basis)));
    return ports;
}

int not_converged(const Options& o, const ConsensusResult& res) {
    if (res.converged) return kExitOk;
    std::cerr << "warning: consensus did not converge after " << res.iterations << " iterations\n";
    return o.strict ? kExitNotConverged : kExitOk;
}

void add_cluster_files(Bundle& b, const CorrelationMatrix& c, const ConsensusResult& res) {
    json pj = report::to_json(res.partition, c.labels);
    pj["iterations"] = res.iterations;
    pj["converged"] = res.converged;
    b.add_json("partition.json", pj);
    b.add("partition.csv", [&](std::ostream& s) { report::write_partition_csv(res.partition, c.labels, s); });
    b.add("affinity.csv", [&](std::ostream& s) { report::write_matrix_csv(res.affinity.values, c.labels, s); });
    b.add("fig2b.csv", [&](std::ostream& s) { report::write_fig2b_csv(c, res.partition, s); });
}

void add_spectrum_files(Bundle& b, const SpectralDecomposition& d, const CorrelationMatrix& c,
                        const Options& o) {
    const auto pairs = localize_pairs(d, c, std::min(o.k_smallest, d.size()), o.dominance);
    b.add_json("spectrum.json", report::spectrum_json(d, c.labels, pairs));
    b.add("eigenvalue_histogram.csv", [&](std::ostream& s) { report::write_eigenvalue_histogram_csv(d, 50, s); });
    b.add("mp_curve.csv", [&](std::ostream& s) { report::write_mp_curve_csv(d.bounds, 201, s); });
}

void add_correlation_files(Bundle& b, const CorrelationMatrix& c, const CoefficientHistogram& h) {
    json cj = report::to_json(c);
    cj["mean_offdiagonal"] = mean_offdiagonal(c);
    b.add_json("correlation.json", cj);
    b.add("correlation.csv", [&](std::ostream& s) { report::write_correlation_csv(c, s); });
    b.add("histogram.csv", [&](std::ostream& s) { report::write_histogram_csv(h, s); });
    b.add_json("histogram.json", report::to_json(h));
}

// --- subcommands ------------------------------------------------------------

int cmd_ingest(const Options& o, std::string& stage) {
    stage = "ingest";
    const PricePanel prices = load_panel(o.input, parse_layout(o.layout), load_options(o));
    const ReturnPanel r = compute_returns(prices, o.delta_t, o.clip);
    Bundle b;
    b.add("prices.csv", [&](std::ostream& s) { report::write_price_panel_csv(prices, s); });
    b.add("returns.csv", [&](std::ostream& s) { report::write_returns_csv(r, s); });
    b.add_json("returns.json", report::returns_sidecar(r, &prices));
    stage = "write";
    b.flush(o.out);
    std::cout << "ingested " << prices.n_series() << " series x " << prices.n_dates() << " dates ("
              << prices.fill_log.size() << " filled, " << r.clipped.size() << " clipped)\n";
    return kExitOk;
}

int cmd_correlate(const Options& o, std::string& stage) {
    stage = "ingest";
    const ReturnPanel r = load_returns(o);
    stage = "correlation";
    CorrelationMatrix c = correlation_matrix(standardize(r), r.labels, o.threads);
    const CoefficientHistogram h = coefficient_histogram(c, o.bins);
    Bundle b;
    add_correlation_files(b, c, h);
    stage = "write";
    b.flush(o.out);
    std::cout << "mean correlation " << report::format_number(mean_offdiagonal(c)) << ", "
              << h.peak_count() << " histogram peak(s)\n";
    return kExitOk;
}

int cmd_spectrum(const Options& o, std::string& stage) {
    stage = "ingest";
    const CorrelationMatrix c = load_correlation(o);
    stage = "spectra";
    const SpectralDecomposition d = eigendecompose(c, mp_bounds(c.t_effective, c.size(), o.sigma2));
    Bundle b;
    add_spectrum_files(b, d, c, o);
    stage = "write";
    b.flush(o.out);
    const BulkDeviation dev = bulk_deviation_report(d);
    std::cout << "above " << dev.above << ", bulk " << dev.bulk << ", below " << dev.below << "\n";
    return kExitOk;
}

int cmd_cluster(const Options& o, std::string& stage) {
    stage = "ingest";
    const CorrelationMatrix c = load_correlation(o);
    stage = "seriation";
    const ConsensusResult res = consensus_cluster(c, consensus_config(o), *o.seed);
    Bundle b;
    add_cluster_files(b, c, res);
    stage = "write";
    b.flush(o.out);
    std::cout << "K = " << res.partition.k << " after " << res.iterations << " iteration(s)\n";
    return not_converged(o, res);
}

int cmd_portfolio(const Options& o, std::string& stage) {
    stage = "ingest";
    const ReturnPanel r = load_returns(o);
    const CorrelationMatrix c = load_correlation(o);
    stage = "portfolio";
    const SpectralDecomposition d = eigendecompose(c, mp_bounds(c.t_effective, c.size(), o.sigma2));
    const auto ports = make_portfolios(d, r, o);
    const Eigen::MatrixXd x = parse_basis(o.basis) == ReturnBasis::Raw ? r.returns : standardize(r);
    const Eigen::VectorXd mean = cross_sectional_mean(x);
    Bundle b;
    b.add("eigenportfolios.csv", [&](std::ostream& s) { report::write_eigenportfolios_csv(r.dates, ports, mean, s); });
    b.add_json("eigenportfolios.json", portfolios_json(ports, r.labels, o.basis));
    stage = "write";
    b.flush(o.out);
    for (const auto& p : ports) std::cout << "R^2(k=" << p.k << ") = " << report::format_number(p.r_squared) << "\n";
    return kExitOk;
}

int cmd_index(const Options& o, std::string& stage) {
    stage = "ingest";
    const PricePanel prices = load_panel(o.prices_path, Layout::Wide, load_options(o));
    const CorrelationMatrix c = load_correlation(o);
    if (c.labels != prices.labels) throw InputError("price and correlation series labels differ");
    stage = "portfolio";
    const SpectralDecomposition d = eigendecompose(c, mp_bounds(c.t_effective, c.size(), o.sigma2));
    const IndexBundle ib = make_index(prices, d, o.index_k, o.base, o.clip);
    Bundle b;
    b.add("index.csv", [&](std::ostream& s) { report::write_index_csv(prices.dates, ib.report, ib.benchmark, s); });
    b.add_json("index.json", index_json(ib, o.index_k));
    stage = "write";
    b.flush(o.out);
    std::cout << "terminal ratio " << report::format_number(ib.report.terminal_ratio) << "\n";
    return kExitOk;
}

int cmd_synth(const Options& o, std::string& stage) {
    stage = "synth";
    const std::uint64_t seed = *o.seed;
    constexpr double kDailyScale = 0.01;
    const Date start(2000, 1, 3);
    Eigen::MatrixXd r;
    json truth{{"scenario", o.scenario}, {"seed", seed}};
    auto pick = [](std::size_t given, std::size_t dflt) { return given > 0 ? given : dflt; };

    if (o.scenario == "paper71") {
        BlockModelSpec spec = paper71_spec(seed);
        spec.t = pick(o.synth_t, spec.t);
        const BlockPanel bp = generate_block_panel(spec);
        r = bp.returns * kDailyScale;
        truth["labels"] = bp.labels;
    } else if (o.scenario == "noise") {
        r = standard_normal_matrix(pick(o.synth_t, 5000), pick(o.synth_n, 70), seed) * kDailyScale;
    } else if (o.scenario == "factor" || o.scenario == "bubble") {
        FactorModelSpec spec = calibrated_factor_spec(pick(o.synth_n, 71), pick(o.synth_t, 5272), 0.57, seed);
        spec.scale = kDailyScale;
        if (o.scenario == "bubble") spec.factor_drift = bubble_drift(spec.t, 0.6, 1.5, 1.0);
        r = generate_factor_panel(spec);
        truth["betas"] = spec.betas;
        truth["idio_sigma"] = spec.idio_sigma;
    } else if (o.scenario == "pairs") {
        DuplicatePairSpec spec;
        spec.n = pick(o.synth_n, spec.n);
        spec.t = pick(o.synth_t, spec.t);
        spec.seed = seed;
        const DuplicatePairPanel dp = generate_duplicate_pair_panel(spec);
        r = dp.returns * kDailyScale;
        json pairs = json::array();
        for (const auto& p : dp.pairs) {
            pairs.push_back({{"first", p.first + 1}, {"second", p.second + 1}, {"correlation", p.correlation}});
        }
        truth["planted_pairs"] = pairs;
    } else {
        throw UsageError("unknown scenario '" + o.scenario + "'");
    }
    const PricePanel prices = prices_from_returns(r, default_labels(static_cast<std::size_t>(r.cols())), start);
    Bundle b;
    b.add("prices.csv", [&](std::ostream& s) { report::write_price_panel_csv(prices, s); });
    b.add_json("truth.json", truth);
    stage = "write";
    b.flush(o.out);
    std::cout << "wrote " << o.scenario << " panel: " << prices.n_series() << " series x "
              << prices.n_dates() << " dates\n";
    return kExitOk;
}

json config_echo(const Options& o) {
    json a{{"initial_acceptance", o.anneal.initial_acceptance},
           {"cooling", o.anneal.cooling},
           {"moves_per_temperature", o.anneal.moves_per_temperature},
           {"frozen_temperatures", o.anneal.frozen_temperatures},
           {"calibration_moves", o.anneal.calibration_moves}};
    json j{{"input", o.input},      {"layout", o.layout},     {"trim", !o.no_trim},
           {"delta_t", o.delta_t},  {"clip_threshold", o.clip}, {"bins", o.bins},
           {"sigma2", o.sigma2},    {"k_smallest", o.k_smallest}, {"dominance", o.dominance},
           {"seed", *o.seed},       {"n_runs", o.n_runs},     {"gamma", o.gamma},
           {"max_iterations", o.max_iterations}, {"annealing", a},
           {"portfolios", o.portfolios}, {"basis", o.basis}, {"index_portfolio", o.index_k}};
    j["base"] = o.base ? json(*o.base) : json(nullptr);
    return j;
}

int cmd_pipeline(const Options& o, std::string& stage) {
    stage = "ingest";
    const PricePanel prices = load_panel(o.input, parse_layout(o.layout), load_options(o));
    const ReturnPanel r = compute_returns(prices, o.delta_t, o.clip);

    stage = "correlation";
    const CorrelationMatrix c = correlation_matrix(standardize(r), r.labels, o.threads);
    const CoefficientHistogram h = coefficient_histogram(c, o.bins);

    stage = "spectra";
    const SpectralDecomposition d = eigendecompose(c, mp_bounds(c.t_effective, c.size(), o.sigma2));
    const BulkDeviation dev = bulk_deviation_report(d);

    stage = "seriation";
    const ConsensusResult res = consensus_cluster(c, consensus_config(o), *o.seed);

    stage = "portfolio";
    const auto ports = make_portfolios(d, r, o);
    const Eigen::MatrixXd x = parse_basis(o.basis) == ReturnBasis::Raw ? r.returns : standardize(r);
    const Eigen::VectorXd mean = cross_sectional_mean(x);
    const IndexBundle ib = make_index(prices, d, o.index_k, o.base, o.clip);

    json headline{{"n_series", c.size()},
                  {"n_samples", c.t_effective},
                  {"mean_correlation", mean_offdiagonal(c)},
                  {"histogram_peaks", h.peak_count()},
                  {"lambda_max_rmt", d.bounds.lambda_max},
                  {"lambda_min_rmt", d.bounds.lambda_min},
                  {"above_bulk", dev.above},
                  {"bulk", dev.bulk},
                  {"below_bulk", dev.below},
                  {"lambda_1", d.eigenvalues(0)},
                  {"lambda_1_over_n", d.eigenvalues(0) / static_cast<double>(c.size())},
                  {"clusters", res.partition.k},
                  {"consensus_iterations", res.iterations},
                  {"consensus_converged", res.converged}};
    json r2 = json::object();
    for (const auto& p : ports) r2["k" + std::to_string(p.k)] = p.r_squared;
    headline["r_squared"] = r2;
    headline["terminal_ratio"] = ib.report.terminal_ratio;
    headline["index_log_correlation"] = ib.report.log_correlation;

    json manifest{{"schema_version", kSchemaVersion}, {"config", config_echo(o)}, {"results", headline}};

    Bundle b;
    b.add("prices.csv", [&](std::ostream& s) { report::write_price_panel_csv(prices, s); });
    b.add("returns.csv", [&](std::ostream& s) { report::write_returns_csv(r, s); });
    b.add_json("returns.json", report::returns_sidecar(r, &prices));
    add_correlation_files(b, c, h);
    add_spectrum_files(b, d, c, o);
    add_cluster_files(b, c, res);
    const std::vector<std::size_t> ranks{1, 2, 3, 4, 5, 6};
    std::vector<std::size_t> shown;
    for (auto k : ranks) if (k <= d.size()) shown.push_back(k);
    const ReorderedEigenvectors rev = reorder_eigenvectors(d, res.partition, shown);
    b.add("eigenvectors_reordered.csv", [&](std::ostream& s) { report::write_reordered_eigenvectors_csv(rev, c.labels, s); });
    b.add("eigenportfolios.csv", [&](std::ostream& s) { report::write_eigenportfolios_csv(r.dates, ports, mean, s); });
    b.add_json("eigenportfolios.json", portfolios_json(ports, r.labels, o.basis));
    b.add("index.csv", [&](std::ostream& s) { report::write_index_csv(prices.dates, ib.report, ib.benchmark, s); });
    b.add_json("index.json", index_json(ib, o.index_k));
    b.add_json("manifest.json", manifest);
    stage = "write";
    b.flush(o.out);

    std::cout << "N=" << c.size() << " T=" << c.t_effective << " <c>=" << report::format_number(mean_offdiagonal(c))
              << " above=" << dev.above << " K=" << res.partition.k << "\n";
    return not_converged(o, res);
}

// --- option wiring ----------------------------------------------------------

void add_out(CLI::App* app, Options& o) {
    app->add_option("-o,--out", o.out, "Output directory (created if missing)");
    app->add_option("--threads", o.threads, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
}

void add_ingest_opts(CLI::App* app, Options& o) {
    app->add_option("--layout", o.layout, "Input layout: wide (date + one column per series) or long (date,label,price)")
        ->check(CLI::IsMember({"wide", "long"}));
    app->add_flag("--no-trim", o.no_trim,
                  "Keep the union date range and back-fill leading gaps instead of trimming to the common range");
    app->add_option("--delta-t", o.delta_t, "Return horizon in rows: r(t) = ln P(t+dt) - ln P(t)");
    app->add_option("--clip", o.clip, "Absolute log returns above this are treated as data errors and set to 0");
}

void add_spectrum_opts(CLI::App* app, Options& o) {
    app->add_option("--sigma2", o.sigma2, "Noise variance of the random-matrix reference (1 for standardized data)");
    app->add_option("--k-smallest", o.k_smallest, "Number of smallest eigenvectors inspected for localized pairs");
    app->add_option("--dominance", o.dominance,
                    "A component is dominant when |u_i| >= dominance * max |u|");
}

void add_cluster_opts(CLI::App* app, Options& o) {
    app->add_option("--n-runs", o.n_runs, "Annealing + segmentation runs per consensus level");
    app->add_option("--gamma", o.gamma, "Resolution: block gain is sum of entries minus gamma * <m> * b(b-1)");
    app->add_option("--max-iterations", o.max_iterations, "Consensus levels before giving up on convergence");
    app->add_option("--cooling", o.anneal.cooling, "Geometric cooling factor per temperature");
    app->add_option("--moves", o.anneal.moves_per_temperature, "Proposals per temperature, as a multiple of N");
    app->add_option("--initial-acceptance", o.anneal.initial_acceptance,
                    "Fraction of uphill moves accepted at the starting temperature");
    app->add_option("--frozen", o.anneal.frozen_temperatures,
                    "Stop after this many temperatures without an accepted move");
}

void add_portfolio_opts(CLI::App* app, Options& o) {
    app->add_option("--k", o.portfolios, "Eigenportfolio ranks (1 = largest eigenvalue)")->delimiter(',');
    app->add_option("--basis", o.basis, "Returns the weights apply to: raw or standardized")
        ->check(CLI::IsMember({"raw", "standardized"}));
}

void add_index_opts(CLI::App* app, Options& o) {
    app->add_option("--index-k", o.index_k, "Eigenportfolio rank compounded into the index");
    app->add_option("--base", o.base, "Index value at the first date (default: first average price)");
}

void add_seed(CLI::App* app, Options& o) {
    app->add_option("--seed", o.seed, "Master random seed (required)")->required();
}

int report_error(const std::string& stage, const std::string& message, int code, const Options& o) {
    std::cerr << "[" << stage << "] error: " << message << "\n";
    try {
        fs::create_directories(o.out);
        std::ofstream log(fs::path(o.out) / "error.log", std::ios::binary | std::ios::trunc);
        log << "stage: " << stage << "\nexit_code: " << code << "\nmessage: " << message << "\n";
    } catch (...) {
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlation structure of multivariate price series: random-matrix filtering, "
                 "seriation-based clustering and eigenportfolios"};
    app.require_subcommand(1);
    Options o;
    app.add_flag("--strict", o.strict, "Exit with code 4 when consensus clustering does not converge");

    auto* ingest = app.add_subcommand("ingest", "Align a price file and compute log returns");
    ingest->add_option("-i,--input", o.input, "Price file (CSV, TSV or semicolon separated)")->required();
    add_ingest_opts(ingest, o);
    add_out(ingest, o);

    auto* correlate = app.add_subcommand("correlate", "Correlation matrix and coefficient histogram");
    correlate->add_option("--returns", o.returns_path, "returns.csv from ingest (reads returns.json beside it)")->required();
    correlate->add_option("--bins", o.bins, "Histogram bins over [-1, 1]");
    add_out(correlate, o);

    auto* spectrum = app.add_subcommand("spectrum", "Eigenvalues against the random-matrix bulk, localized pairs");
    spectrum->add_option("--correlation", o.correlation_path, "correlation.json from correlate")->required();
    add_spectrum_opts(spectrum, o);
    add_out(spectrum, o);

    auto* cluster = app.add_subcommand("cluster", "Consensus clustering by seriation and block segmentation");
    cluster->add_option("--correlation", o.correlation_path, "correlation.json from correlate")->required();
    add_cluster_opts(cluster, o);
    add_seed(cluster, o);
    add_out(cluster, o);

    auto* portfolio = app.add_subcommand("portfolio", "Eigenportfolio return series and R^2 against the mean return");
    portfolio->add_option("--returns", o.returns_path, "returns.csv from ingest")->required();
    portfolio->add_option("--correlation", o.correlation_path, "correlation.json from correlate")->required();
    add_portfolio_opts(portfolio, o);
    add_out(portfolio, o);

    auto* index = app.add_subcommand("index", "Buy-and-hold index of an eigenportfolio against the average price");
    index->add_option("--prices", o.prices_path, "prices.csv from ingest (wide layout)")->required();
    index->add_option("--correlation", o.correlation_path, "correlation.json from correlate")->required();
    index->add_option("--clip", o.clip, "Clip threshold for the daily returns");
    add_index_opts(index, o);
    add_out(index, o);

    auto* synth = app.add_subcommand("synth", "Write a synthetic price panel with known structure");
    synth->add_option("scenario", o.scenario, "paper71 | noise | factor | bubble | pairs")
        ->required()
        ->check(CLI::IsMember({"paper71", "noise", "factor", "bubble", "pairs"}));
    synth->add_option("--t", o.synth_t, "Number of return samples (scenario default if omitted)");
    synth->add_option("--n", o.synth_n, "Number of series, where the scenario allows it");
    add_seed(synth, o);
    add_out(synth, o);

    auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write all reports plus manifest.json");
    pipeline->add_option("-i,--input", o.input, "Price file")->required();
    add_ingest_opts(pipeline, o);
    pipeline->add_option("--bins", o.bins, "Histogram bins over [-1, 1]");
    add_spectrum_opts(pipeline, o);
    add_cluster_opts(pipeline, o);
    add_portfolio_opts(pipeline, o);
    add_index_opts(pipeline, o);
    add_seed(pipeline, o);
    add_out(pipeline, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    std::string stage = "setup";
    try {
        validate(o);
        if (ingest->parsed()) return cmd_ingest(o, stage);
        if (correlate->parsed()) return cmd_correlate(o, stage);
        if (spectrum->parsed()) return cmd_spectrum(o, stage);
        if (cluster->parsed()) return cmd_cluster(o, stage);
        if (portfolio->parsed()) return cmd_portfolio(o, stage);
        if (index->parsed()) return cmd_index(o, stage);
        if (synth->parsed()) return cmd_synth(o, stage);
        if (pipeline->parsed()) return cmd_pipeline(o, stage);
    } catch (const Error& e) {
        return report_error(stage, e.what(), e.kind() == ErrorKind::numerical ? kExitNumerical : kExitInput, o);
    } catch (const fs::filesystem_error& e) {
        return report_error(stage, e.what(), kExitInput, o);
    } catch (const std::exception& e) {
        return report_error(stage, e.what(), kExitNumerical, o);
    }
    return kExitInput;
}

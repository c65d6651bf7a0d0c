// Drives the corrstruct executable end to end through the shell.

#include <json.hpp>

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kWork = fs::absolute("cli_work");

int run(const std::string& args, const std::string& log = "run.log") {
    fs::create_directories(kWork);
    const std::string cmd = std::string("\"") + CORRSTRUCT_EXE + "\" " + args + " > \"" +
                            (kWork / log).string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string w(const std::string& rel) { return "\"" + (kWork / rel).string() + "\""; }

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string l;
    std::getline(in, l);
    return l;
}

}  // namespace

TEST_CASE("help lists every subcommand") {
    REQUIRE(run("--help", "help.txt") == 0);
    const std::string text = slurp(kWork / "help.txt");
    for (const char* sub : {"ingest", "correlate", "spectrum", "cluster", "portfolio", "index", "synth", "pipeline"})
        CHECK(text.find(sub) != std::string::npos);
    REQUIRE(run("pipeline --help", "help_pipeline.txt") == 0);
    const std::string p = slurp(kWork / "help_pipeline.txt");
    for (const char* flag : {"--seed", "--delta-t", "--clip", "--n-runs", "--gamma", "--cooling", "--dominance", "--threads"})
        CHECK(p.find(flag) != std::string::npos);
}

TEST_CASE("stochastic subcommands require a seed") {
    CHECK(run("synth noise -o " + w("noseed")) == 2);
    CHECK(run("pipeline -i x.csv -o " + w("noseed")) == 2);
    CHECK(run("cluster --correlation x.json -o " + w("noseed")) == 2);
    CHECK(run("synth nonsense --seed 1 -o " + w("noseed")) == 2);
}

TEST_CASE("stage by stage run on a small six-block panel") {
    const std::string d = w("stages");
    REQUIRE(run("synth paper71 --seed 5 --t 1500 -o " + d) == 0);
    CHECK(first_line(kWork / "stages/prices.csv").rfind("date,S1,S2,", 0) == 0);
    REQUIRE(run("ingest -i " + w("stages/prices.csv") + " -o " + d) == 0);
    REQUIRE(run("correlate --returns " + w("stages/returns.csv") + " -o " + d) == 0);
    REQUIRE(run("spectrum --correlation " + w("stages/correlation.json") + " -o " + d) == 0);
    REQUIRE(run("cluster --correlation " + w("stages/correlation.json") + " --seed 2 --n-runs 6 -o " + d) == 0);
    REQUIRE(run("portfolio --returns " + w("stages/returns.csv") + " --correlation " + w("stages/correlation.json") +
                " --k 1,2 -o " + d) == 0);
    REQUIRE(run("index --prices " + w("stages/prices.csv") + " --correlation " + w("stages/correlation.json") +
                " --base 19.4704 -o " + d) == 0);

    const json spectrum = json::parse(slurp(kWork / "stages/spectrum.json"));
    CHECK(spectrum["counts"]["above"] == 6);
    const json part = json::parse(slurp(kWork / "stages/partition.json"));
    CHECK(part["k"] == 6);
    CHECK(first_line(kWork / "stages/eigenportfolios.csv") == "date,mean_return,R1,R2");
    CHECK(first_line(kWork / "stages/index.csv") == "date,index,average_price,uniform_benchmark");
    std::ifstream idx(kWork / "stages/index.csv");
    std::string header, row;
    std::getline(idx, header);
    std::getline(idx, row);
    CHECK(row.find(",19.4704,") != std::string::npos);
    const json r = json::parse(slurp(kWork / "stages/returns.json"));
    CHECK(r["delta_t"] == 1);
}

TEST_CASE("pipeline manifest on the six-block panel") {
    REQUIRE(run("synth paper71 --seed 8 --t 2000 -o " + w("p71")) == 0);
    REQUIRE(run("pipeline -i " + w("p71/prices.csv") + " --seed 1 --n-runs 8 -o " + w("p71/out")) == 0);
    const json m = json::parse(slurp(kWork / "p71/out/manifest.json"));
    CHECK(m["schema_version"] == 1);
    CHECK(m["results"]["clusters"] == 6);
    CHECK(m["results"]["above_bulk"] == 6);
    CHECK(m["config"]["seed"] == 1);
    CHECK_FALSE(m["config"].contains("threads"));
    for (const char* f : {"correlation.csv", "histogram.csv", "spectrum.json", "partition.csv", "affinity.csv",
                          "fig2b.csv", "eigenportfolios.csv", "index.csv", "mp_curve.csv"})
        CHECK(fs::exists(kWork / "p71/out" / f));

    // identical config and seed give identical bytes, whatever the thread count
    REQUIRE(run("pipeline -i " + w("p71/prices.csv") + " --seed 1 --n-runs 8 --threads 3 -o " + w("p71/out2")) == 0);
    for (const auto& e : fs::directory_iterator(kWork / "p71/out"))
        CHECK(slurp(e.path()) == slurp(kWork / "p71/out2" / e.path().filename()));
}

TEST_CASE("pipeline on pure noise finds no structure") {
    REQUIRE(run("synth noise --seed 3 --t 3000 --n 40 -o " + w("noise")) == 0);
    REQUIRE(run("pipeline -i " + w("noise/prices.csv") + " --seed 2 --n-runs 6 -o " + w("noise/out")) == 0);
    const json m = json::parse(slurp(kWork / "noise/out/manifest.json"));
    CHECK(m["results"]["above_bulk"].get<int>() <= 1);
    // weak spurious groups survive; far fewer than one per series
    CHECK(m["results"]["clusters"].get<int>() <= 6);
}

TEST_CASE("malformed input leaves only an error log") {
    fs::create_directories(kWork / "bad");
    std::ofstream(kWork / "bad/prices.csv") << "date,A,B\n2020-01-01,1,oops\n2020-01-02,2,3\n";
    fs::remove_all(kWork / "bad/out");
    CHECK(run("pipeline -i " + w("bad/prices.csv") + " --seed 1 -o " + w("bad/out"), "bad.log") == 2);
    CHECK(slurp(kWork / "bad.log").find("[ingest]") != std::string::npos);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(kWork / "bad/out")) {
        ++files;
        CHECK(e.path().filename() == "error.log");
    }
    CHECK(files == 1);
    CHECK(run("pipeline -i " + w("bad/missing.csv") + " --seed 1 -o " + w("bad/out2")) == 2);
}

TEST_CASE("zero-variance series is a numerical failure") {
    fs::create_directories(kWork / "flat");
    std::ofstream(kWork / "flat/prices.csv") << "date,A,B\n2020-01-01,1,2\n2020-01-02,1,3\n2020-01-03,1,2.5\n";
    CHECK(run("ingest -i " + w("flat/prices.csv") + " -o " + w("flat/out"), "flat.log") == 3);
    CHECK(slurp(kWork / "flat.log").find("[ingest]") != std::string::npos);
}

TEST_CASE("non-convergence is soft unless strict") {
    REQUIRE(run("synth noise --seed 4 --t 300 --n 8 -o " + w("nc")) == 0);
    REQUIRE(run("ingest -i " + w("nc/prices.csv") + " -o " + w("nc")) == 0);
    REQUIRE(run("correlate --returns " + w("nc/returns.csv") + " -o " + w("nc")) == 0);
    const std::string cmd = "cluster --correlation " + w("nc/correlation.json") + " --seed 1 --n-runs 2 --max-iterations 0 -o " + w("nc/out");
    CHECK(run(cmd) == 0);
    CHECK(run("--strict " + cmd) == 4);
}

TEST_CASE("out-of-range parameters are rejected") {
    CHECK(run("ingest -i x.csv --delta-t 0 -o " + w("rng")) == 2);
    CHECK(run("cluster --correlation x.json --seed 1 --cooling 1.5 -o " + w("rng")) == 2);
}

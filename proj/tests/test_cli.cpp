#include <catch_amalgamated.hpp>

#include "fockfit/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace fockfit;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string& args)
{
    const std::string cmd = std::string(FOCKFIT_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        r.out.append(buf, n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("fockfit_cli_" + std::to_string(::getpid())))
    {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text)
{
    std::ofstream(path) << text;
}

} // namespace

TEST_CASE("cli: usage errors exit 1", "[cli]")
{
    CHECK(run("").status == 1);
    CHECK(run("bogus").status == 1);
    CHECK(run("probs").status == 1);
    CHECK(run("probs --r 1 --vq 0.5 --vp 0.5").status == 1);
    CHECK(run("probs --r -1").status == 1);
    CHECK(run("probs --vq 0.1 --vp 0.1").status == 1);
    CHECK(run("probs --r 1 --nmax 0").status == 1);
    CHECK(run("fidelity --state1 r=1 --state2 x=2").status == 1);
    CHECK(run("--help").status == 0);
}

TEST_CASE("cli: probs", "[cli]")
{
    const auto r = run("probs --r 0 --nbar 1 --nmax 3");
    REQUIRE(r.status == 0);
    CHECK(r.out == "n,probability\n0,0.5\n1,0.25\n2,0.125\n3,0.0625\noverflow,0.0625\n");
}

TEST_CASE("cli: fidelity", "[cli]")
{
    const auto r = run("fidelity --state1 r=0,nbar=0 --state2 r=0,nbar=1");
    REQUIRE(r.status == 0);
    CHECK(r.out == "0.5\n");
    const auto s = run("fidelity --state1 vq=0.5,vp=0.5 --state2 r=1");
    REQUIRE(s.status == 0);
    CHECK(std::stod(s.out) == Catch::Approx(1.0 / std::cosh(1.0)).epsilon(1e-11));
}

TEST_CASE("cli: simulate, estimate and ci", "[cli]")
{
    TempDir dir;
    const auto counts = dir / "counts.json";
    REQUIRE(run("simulate --r 1 --nbar 0.1 --shots 10000 --seed 7 --out " + counts).status == 0);

    SECTION("simulate is byte-identical for a fixed seed")
    {
        const auto a = run("simulate --r 1 --nbar 0.1 --shots 10000 --seed 7");
        REQUIRE(a.status == 0);
        CHECK(a.out == io::read_file(counts));
        CHECK(run("simulate --r 1 --nbar 0.1 --shots 10000 --seed 8").out != a.out);
        const auto h = io::counts_from_json(a.out);
        CHECK(h.total == 10000);
    }
    SECTION("from-exact writes expected counts")
    {
        const auto e = run("simulate --r 0 --nbar 1 --shots 1000 --nmax 3 --from-exact");
        REQUIRE(e.status == 0);
        const auto h = io::counts_from_json(e.out);
        CHECK(h.counts == std::vector<std::int64_t>{500, 250, 125, 63});
        CHECK(h.overflow_count == 62);
    }
    SECTION("estimate")
    {
        const auto out = dir / "est.json";
        REQUIRE(run("estimate --counts " + counts + " --out " + out).status == 0);
        const auto e = io::estimate_from_json(io::read_file(out));
        CHECK(e.fit.converged);
        CHECK(e.fit.state.r == Catch::Approx(1.0).margin(0.1));
        CHECK(e.weight_scheme == WeightScheme::posterior);
        const auto u = run("estimate --counts " + counts + " --weights uniform");
        REQUIRE(u.status == 0);
        CHECK(io::estimate_from_json(u.out).weight_scheme == WeightScheme::uniform);
        CHECK(run("estimate --counts " + counts + " --weights magic").status == 1);
        CHECK(run("estimate --counts " + counts + " --nu 0").status == 1);
    }
    SECTION("ci")
    {
        const auto r = run("ci --counts " + counts + " --replicates 40 --seed 3 --method percentile");
        REQUIRE(r.status == 0);
        const auto e = io::estimate_from_json(r.out);
        REQUIRE(e.intervals.size() == 4);
        CHECK(e.n_b == 40);
        CHECK(e.seed == 3u);
        for (const auto& ci : e.intervals) {
            CHECK(ci.method == IntervalMethod::percentile);
            CHECK(ci.lower <= ci.upper);
        }
        CHECK(run("ci --counts " + counts + " --replicates 40 --seed 3 --method percentile").out ==
              r.out);
        CHECK(run("ci --counts " + counts + " --weights uniform").status == 1);
    }
}

TEST_CASE("cli: I/O and format errors", "[cli]")
{
    TempDir dir;
    CHECK(run("estimate --counts " + (dir / "missing.json")).status == 3);
    const auto bad = dir / "bad.json";
    write(bad, R"({"format_version":1,"n_max":1,"counts":[1,1],"overflow":0,"total":2,"x":1})");
    CHECK(run("estimate --counts " + bad + " --out " + (dir / "est.json")).status == 1);
    CHECK_FALSE(fs::exists(dir / "est.json"));
    write(bad, "{not json");
    CHECK(run("estimate --counts " + bad).status == 1);
    CHECK(run("simulate --r 1 --out " + (dir / "no/such/dir.json")).status == 3);
}

TEST_CASE("cli: study writes the JSON report next to the CSV", "[cli]")
{
    TempDir dir;
    const auto cfg = dir / "cfg.json";
    write(cfg, R"({"format_version":1,"study":"fidelity","true_states":[{"r":1,"nbar":0.1}],
                  "shot_counts":[1000],"n_experiments":3,"master_seed":4})");
    const auto csv = dir / "report.csv";
    REQUIRE(run("study --config " + cfg + " --out " + csv).status == 0);
    CHECK(fs::exists(dir / "report.json"));
}

TEST_CASE("cli: study", "[cli]")
{
    TempDir dir;
    const auto cfg = dir / "cfg.json";
    write(cfg, R"({"format_version":1,"study":"coverage","true_states":[{"r":1,"nbar":0.1}],
                  "shot_counts":[5000],"n_experiments":3,"n_b":[30],"master_seed":4})");
    const auto a = run("study --config " + cfg);
    REQUIRE(a.status == 0);
    CHECK(a.out.rfind("state_r,state_nbar,shots", 0) == 0);
    // header plus one row per method
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 3);
    CHECK(run("study --config " + cfg).out == a.out);

    write(cfg, R"({"format_version":1,"study":"coverage","true_states":[{"r":1,"nbar":0.1}],
                  "exact":true})");
    CHECK(run("study --config " + cfg).status == 1);
    write(cfg, R"({"format_version":1,"study":"coverage","states":[]})");
    CHECK(run("study --config " + cfg).status == 1);
}

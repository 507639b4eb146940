// fockfit: estimate squeezing and temperature from Fock-state count histograms.
//
// Exit codes: 0 success, 1 usage or validation error, 2 convergence failure,
// 3 I/O error.

#include "fockfit/bootstrap.hpp"
#include "fockfit/estimation.hpp"
#include "fockfit/gaussian_model.hpp"
#include "fockfit/io.hpp"
#include "fockfit/sampling.hpp"
#include "fockfit/studies.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace fockfit;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConvergence = 2, kIo = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StateFlags {
    std::optional<double> r, nbar, vq, vp;

    void add_to(CLI::App* cmd)
    {
        cmd->add_option("--r", r, "squeezing parameter r >= 0");
        cmd->add_option("--nbar", nbar, "mean thermal occupation >= 0");
        cmd->add_option("--vq", vq, "q-quadrature variance (vacuum = 0.5)");
        cmd->add_option("--vp", vp, "p-quadrature variance (vacuum = 0.5)");
    }

    QuadratureVariances variances() const
    {
        const bool physical = r || nbar;
        const bool direct = vq || vp;
        if (physical && direct)
            throw UsageError("give either --r/--nbar or --vq/--vp, not both");
        if (direct) {
            if (!vq || !vp)
                throw UsageError("--vq and --vp must be given together");
            const QuadratureVariances v{*vq, *vp};
            require_valid(v);
            return v;
        }
        if (!physical)
            throw UsageError("state required: --r/--nbar or --vq/--vp");
        const SqueezedThermalState s{r.value_or(0.0), nbar.value_or(0.0)};
        require_valid(s);
        return to_variances(s);
    }
};

// "r=1,nbar=0.01" or "vq=0.1,vp=2.5"
QuadratureVariances parse_state(const std::string& text)
{
    StateFlags flags;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw UsageError("state '" + text + "': expected key=value pairs");
        const std::string key = item.substr(0, eq);
        double value = 0.0;
        try {
            std::size_t used = 0;
            value = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1)
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("state '" + text + "': bad number in '" + item + "'");
        }
        if (key == "r") flags.r = value;
        else if (key == "nbar") flags.nbar = value;
        else if (key == "vq") flags.vq = value;
        else if (key == "vp") flags.vp = value;
        else
            throw UsageError("state '" + text + "': unknown key '" + key + "'");
    }
    return flags.variances();
}

void emit(const std::string& out_path, const std::string& content)
{
    if (out_path.empty() || out_path == "-")
        std::cout << content;
    else
        io::write_file_atomic(out_path, content);
}

struct ProbsCmd {
    StateFlags state;
    int n_max = kDefaultNMax;

    int run() const
    {
        const FockDistribution d = fock_distribution(state.variances(), n_max);
        std::cout << "n,probability\n";
        for (int n = 0; n <= d.n_max; ++n)
            std::cout << n << ',' << io::format_double(d.probs(n)) << '\n';
        std::cout << "overflow," << io::format_double(d.overflow) << '\n';
        return kOk;
    }
};

struct SimulateCmd {
    StateFlags state;
    std::int64_t shots = 10000;
    int n_max = kDefaultNMax;
    std::uint64_t seed = 0;
    bool from_exact = false;
    std::string out;

    int run() const
    {
        if (shots < 1)
            throw UsageError("--shots must be >= 1");
        const FockDistribution d = fock_distribution(state.variances(), n_max);
        const FockHistogram h = from_exact ? expected_histogram(d, shots)
                                           : sample_histogram(d, shots, SeedSpec{seed, 0});
        emit(out, io::counts_to_json(h));
        return kOk;
    }
};

struct EstimateCmd {
    std::string counts;
    std::string weights = "posterior";
    double nu = 1.0;
    double eta = 1.0;
    std::string out;
    bool allow_nonconverged = false;

    io::Estimate estimate(const FockHistogram& h) const
    {
        io::Estimate e;
        e.weight_scheme = weight_scheme_from_string(weights);
        e.prior = {nu, eta};
        require_valid(e.prior);
        e.fit = fit(h, make_weights(h, e.weight_scheme, e.prior));
        return e;
    }

    int run() const
    {
        const FockHistogram h = io::counts_from_json(io::read_file(counts));
        const io::Estimate e = estimate(h);
        emit(out, io::estimate_to_json(e));
        if (!e.fit.converged && !allow_nonconverged)
            throw ConvergenceFailure("fit did not converge after " +
                                     std::to_string(e.fit.evaluations) + " evaluations");
        return kOk;
    }
};

struct CiCmd {
    EstimateCmd base;
    int replicates = 1000;
    double alpha = 0.05;
    std::string method = "bc";
    std::uint64_t seed = 0;

    int run() const
    {
        if (replicates < 2)
            throw UsageError("--replicates must be >= 2");
        const IntervalMethod m = interval_method_from_string(method);
        if (base.weights != "posterior")
            throw UsageError("ci refits replicates with posterior weights; use --weights posterior");
        const FockHistogram h = io::counts_from_json(io::read_file(base.counts));
        io::Estimate e = base.estimate(h);
        if (!e.fit.converged)
            throw ConvergenceFailure("point estimate did not converge");
        const ReplicateSet set = parametric_bootstrap(e.fit, h.total, replicates, e.prior,
                                                      SeedSpec{seed, 0}, h.n_max);
        const ParameterEstimates point = estimates_of(e.fit);
        for (Parameter p : kAllParameters)
            e.intervals.push_back(make_interval(set, point, p, m, alpha));
        e.n_b = replicates;
        e.seed = seed;
        emit(base.out, io::estimate_to_json(e));
        return kOk;
    }
};

struct FidelityCmd {
    std::string state1, state2;

    int run() const
    {
        const double f = fidelity(parse_state(state1), parse_state(state2));
        std::printf("%.12g\n", f);
        return kOk;
    }
};

struct StudyCmd {
    std::string config;
    std::string out;
    std::string json_out;

    int run() const
    {
        const io::StudyRequest req = io::study_request_from_json(io::read_file(config));
        StudyReport report;
        switch (req.kind) {
        case io::StudyKind::fidelity: report = fidelity_study(req.config); break;
        case io::StudyKind::bias: report = bias_study(req.config); break;
        case io::StudyKind::coverage: report = coverage_study(req.config); break;
        case io::StudyKind::weights: report = weight_comparison_study(req.config); break;
        }
        std::string json_path = json_out;
        if (json_path.empty() && !out.empty() && out != "-")
            json_path = std::filesystem::path(out).replace_extension(".json").string();
        emit(out, io::report_to_csv(report));
        if (!json_path.empty())
            io::write_file_atomic(json_path, io::report_to_json(report, req.kind));
        if (report.failed_fits() > 0)
            throw ConvergenceFailure(std::to_string(report.failed_fits()) +
                                     " fits did not converge");
        return kOk;
    }
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Squeezing and temperature estimation from Fock-state histograms"};
    app.require_subcommand(1);

    ProbsCmd probs;
    auto* probs_cmd = app.add_subcommand("probs", "print the Fock distribution of a state as CSV");
    probs.state.add_to(probs_cmd);
    probs_cmd->add_option("--nmax", probs.n_max, "largest resolved Fock number")
        ->check(CLI::Range(1, kMaxNMax));

    SimulateCmd simulate;
    auto* sim_cmd = app.add_subcommand("simulate", "sample a counts file from a state");
    simulate.state.add_to(sim_cmd);
    sim_cmd->add_option("--shots", simulate.shots, "number of Fock measurements");
    sim_cmd->add_option("--nmax", simulate.n_max, "largest resolved Fock number")
        ->check(CLI::Range(1, kMaxNMax));
    sim_cmd->add_option("--seed", simulate.seed, "random seed");
    sim_cmd->add_flag("--from-exact", simulate.from_exact,
                      "write expected counts round(shots * P(n)) instead of sampling");
    sim_cmd->add_option("--out", simulate.out, "output counts JSON (default stdout)");

    auto add_estimate_options = [](CLI::App* cmd, EstimateCmd& e) {
        cmd->add_option("--counts", e.counts, "counts JSON file")->required();
        cmd->add_option("--weights", e.weights, "posterior, mle or uniform");
        cmd->add_option("--nu", e.nu, "Beta prior shape nu");
        cmd->add_option("--eta", e.eta, "Beta prior shape eta");
        cmd->add_option("--out", e.out, "output estimate JSON (default stdout)");
    };

    EstimateCmd estimate;
    auto* est_cmd = app.add_subcommand("estimate", "fit (vq, vp) to a counts file");
    add_estimate_options(est_cmd, estimate);
    est_cmd->add_flag("--allow-nonconverged", estimate.allow_nonconverged,
                      "exit 0 even if the fit did not converge");

    CiCmd ci;
    auto* ci_cmd = app.add_subcommand("ci", "fit plus parametric-bootstrap confidence intervals");
    add_estimate_options(ci_cmd, ci.base);
    ci_cmd->add_option("--replicates", ci.replicates, "bootstrap replicates N_B");
    ci_cmd->add_option("--alpha", ci.alpha, "interval level is 1 - 2 alpha")
        ->check(CLI::Range(0.0, 0.5));
    ci_cmd->add_option("--method", ci.method, "percentile or bc");
    ci_cmd->add_option("--seed", ci.seed, "random seed");

    FidelityCmd fid;
    auto* fid_cmd = app.add_subcommand("fidelity", "fidelity between two states");
    fid_cmd->add_option("--state1", fid.state1, "e.g. r=1,nbar=0.01 or vq=0.5,vp=0.5")
        ->required();
    fid_cmd->add_option("--state2", fid.state2, "second state")->required();

    StudyCmd study;
    auto* study_cmd = app.add_subcommand("study", "run a simulation study from a JSON config");
    study_cmd->add_option("--config", study.config, "study config JSON")->required();
    study_cmd->add_option("--out", study.out, "report CSV (default stdout)");
    study_cmd->add_option("--json", study.json_out,
                          "report JSON (default: --out with .json extension)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*probs_cmd) return probs.run();
        if (*sim_cmd) return simulate.run();
        if (*est_cmd) return estimate.run();
        if (*ci_cmd) return ci.run();
        if (*fid_cmd) return fid.run();
        if (*study_cmd) return study.run();
    } catch (const io::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const ConvergenceFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConvergence;
    } catch (const BootstrapError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

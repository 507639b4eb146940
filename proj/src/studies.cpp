#include "fockfit/studies.hpp"

#include "fockfit/parallel.hpp"
#include "fockfit/sampling.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fockfit {

std::vector<std::int64_t> default_shot_grid()
{
    std::vector<std::int64_t> grid;
    for (int i = 0; i <= 6; ++i)
        grid.push_back(std::llround(std::pow(10.0, 2.0 + 0.5 * i)));
    return grid;
}

void require_valid(const StudyConfig& cfg)
{
    if (cfg.true_states.empty())
        throw std::invalid_argument("study config: true_states is empty");
    for (const auto& s : cfg.true_states)
        require_valid(s);
    if (cfg.shot_counts.empty())
        throw std::invalid_argument("study config: shot_counts is empty");
    for (auto n : cfg.shot_counts)
        if (n < 1)
            throw std::invalid_argument("study config: shot counts must be positive");
    if (cfg.n_experiments < 1)
        throw std::invalid_argument("study config: n_experiments must be positive");
    for (int b : cfg.n_b)
        if (b < 2)
            throw std::invalid_argument("study config: n_b entries must be >= 2");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 0.5))
        throw std::invalid_argument("study config: alpha must lie in (0, 0.5)");
    require_valid(cfg.prior);
    for (const auto& s : cfg.schemes)
        require_valid(s.prior);
    if (cfg.n_max < 1 || cfg.n_max > kMaxNMax)
        throw std::invalid_argument("study config: n_max must lie in [1, 64]");
}

int StudyReport::failed_fits() const
{
    return std::accumulate(rows.begin(), rows.end(), 0,
                           [](int acc, const StudyRow& row) { return acc + row.n_failed; });
}

SeedSpec experiment_seed(std::uint64_t master_seed, std::size_t state_index,
                         std::size_t shot_index, std::size_t experiment)
{
    return SeedSpec{master_seed, 0}.child(state_index).child(shot_index).child(experiment);
}

namespace {

struct Moments {
    double mean = 0.0;
    double std_dev = 0.0;
};

Moments moments(const std::vector<double>& xs)
{
    Moments m;
    if (xs.empty())
        return m;
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - m.mean) * (x - m.mean);
        m.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return m;
}

std::vector<FitResult> point_estimates(const StudyConfig& cfg, std::size_t state_index,
                                       std::size_t shot_index, const SchemeSpec& scheme)
{
    const SqueezedThermalState truth = cfg.true_states[state_index];
    const std::int64_t shots = cfg.shot_counts[shot_index];
    const FockDistribution model = fock_distribution(to_variances(truth), cfg.n_max);

    std::vector<FitResult> fits(static_cast<std::size_t>(cfg.n_experiments));
    parallel_for(fits.size(), [&](std::size_t e) {
        if (cfg.exact) {
            const FockHistogram h = expected_histogram(model, shots);
            fits[e] = fit(model.bins(), make_weights(h, scheme.scheme, scheme.prior),
                          cfg.fit_options);
            return;
        }
        const FockHistogram h =
            sample_histogram(model, shots, experiment_seed(cfg.master_seed, state_index,
                                                           shot_index, e));
        fits[e] = fit(h, make_weights(h, scheme.scheme, scheme.prior), cfg.fit_options);
    });
    return fits;
}

StudyRow summarize(const SqueezedThermalState& truth, std::int64_t shots,
                   const SchemeSpec& scheme, const std::vector<FitResult>& fits)
{
    StudyRow row;
    row.state = truth;
    row.shots = shots;
    row.scheme = scheme;
    row.n_experiments = static_cast<int>(fits.size());

    const QuadratureVariances true_v = to_variances(truth);
    const ParameterEstimates true_values = estimates_of(truth);
    std::vector<double> fid, infid;
    std::array<std::vector<double>, 4> values;
    for (const auto& f : fits) {
        if (!f.converged) {
            ++row.n_failed;
            continue;
        }
        const double F = fidelity(f.variances, true_v);
        fid.push_back(F);
        infid.push_back(1.0 - F);
        const ParameterEstimates est = estimates_of(f);
        for (Parameter p : kAllParameters)
            values[static_cast<std::size_t>(p)].push_back(est[p]);
    }

    const Moments mf = moments(fid);
    const Moments mi = moments(infid);
    row.mean_fidelity = mf.mean;
    row.std_fidelity = mf.std_dev;
    row.mean_infidelity = mi.mean;
    row.std_infidelity = mi.std_dev;
    for (Parameter p : kAllParameters) {
        const auto idx = static_cast<std::size_t>(p);
        const Moments m = moments(values[idx]);
        ParameterStats& s = row.parameters[idx];
        s.truth = true_values[p];
        s.mean = m.mean;
        s.bias = m.mean - s.truth;
        s.std_dev = m.std_dev;
        s.bias_over_std = m.std_dev > 0.0 ? s.bias / m.std_dev : 0.0;
    }
    return row;
}

SchemeSpec primary_scheme(const StudyConfig& cfg)
{
    return {cfg.weight_scheme, cfg.prior};
}

StudyReport point_estimate_study(const StudyConfig& cfg, const std::vector<SchemeSpec>& schemes)
{
    require_valid(cfg);
    StudyReport report;
    for (std::size_t s = 0; s < cfg.true_states.size(); ++s)
        for (std::size_t j = 0; j < cfg.shot_counts.size(); ++j)
            for (const auto& scheme : schemes)
                report.rows.push_back(summarize(cfg.true_states[s], cfg.shot_counts[j], scheme,
                                                point_estimates(cfg, s, j, scheme)));
    return report;
}

} // namespace

StudyReport fidelity_study(const StudyConfig& cfg)
{
    return point_estimate_study(cfg, {primary_scheme(cfg)});
}

StudyReport bias_study(const StudyConfig& cfg)
{
    return point_estimate_study(cfg, {primary_scheme(cfg)});
}

StudyReport weight_comparison_study(const StudyConfig& cfg)
{
    if (cfg.schemes.size() < 2)
        throw std::invalid_argument("weight comparison study needs at least two schemes");
    return point_estimate_study(cfg, cfg.schemes);
}

StudyReport coverage_study(const StudyConfig& cfg)
{
    require_valid(cfg);
    if (cfg.exact)
        throw std::invalid_argument("coverage study requires sampled data (exact = false)");
    if (cfg.n_b.empty() || cfg.methods.empty())
        throw std::invalid_argument("coverage study needs n_b values and interval methods");

    StudyReport report;
    const SchemeSpec scheme{WeightScheme::posterior, cfg.prior};
    for (std::size_t s = 0; s < cfg.true_states.size(); ++s) {
        for (std::size_t j = 0; j < cfg.shot_counts.size(); ++j) {
            const SeedSpec base = SeedSpec{cfg.master_seed, 0}.child(s).child(j);
            for (int n_b : cfg.n_b) {
                const CoverageRun run = coverage_probability(
                    cfg.true_states[s], cfg.shot_counts[j], cfg.n_experiments, n_b, cfg.alpha,
                    cfg.methods, cfg.prior, base, cfg.n_max, cfg.fit_options);
                const StudyRow summary =
                    summarize(cfg.true_states[s], cfg.shot_counts[j], scheme, run.point_estimates);
                for (const auto& result : run.results) {
                    StudyRow row = summary;
                    row.method = result.method;
                    row.n_b = n_b;
                    row.coverage = result.coverage;
                    report.rows.push_back(row);
                }
            }
        }
    }
    return report;
}

} // namespace fockfit

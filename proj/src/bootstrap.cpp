#include "fockfit/bootstrap.hpp"

#include "fockfit/numerics.hpp"
#include "fockfit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fockfit {

std::string_view to_string(Parameter p)
{
    switch (p) {
    case Parameter::vq: return "vq";
    case Parameter::vp: return "vp";
    case Parameter::r: return "r";
    case Parameter::nbar: return "nbar";
    }
    return "vq";
}

std::string_view to_string(IntervalMethod m)
{
    return m == IntervalMethod::bc ? "bc" : "percentile";
}

Parameter parameter_from_string(std::string_view name)
{
    for (Parameter p : kAllParameters)
        if (to_string(p) == name)
            return p;
    throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
}

IntervalMethod interval_method_from_string(std::string_view name)
{
    if (name == "percentile") return IntervalMethod::percentile;
    if (name == "bc") return IntervalMethod::bc;
    throw std::invalid_argument("unknown interval method '" + std::string(name) +
                                "' (expected percentile or bc)");
}

double ParameterEstimates::operator[](Parameter p) const
{
    switch (p) {
    case Parameter::vq: return vq;
    case Parameter::vp: return vp;
    case Parameter::r: return r;
    case Parameter::nbar: return nbar;
    }
    return vq;
}

ParameterEstimates estimates_of(const QuadratureVariances& v, const SqueezedThermalState& s)
{
    return {v.vq, v.vp, s.r, s.nbar};
}

ParameterEstimates estimates_of(const FitResult& fit)
{
    return estimates_of(fit.variances, fit.state);
}

ParameterEstimates estimates_of(const SqueezedThermalState& s)
{
    return estimates_of(to_variances(s), s);
}

std::vector<double> ReplicateSet::sorted(Parameter p) const
{
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& rec : records)
        if (rec.converged)
            out.push_back(rec.estimate[p]);
    std::sort(out.begin(), out.end());
    return out;
}

ReplicateSet parametric_bootstrap(const FitResult& point, std::int64_t n_shots, int n_b,
                                  const PriorShape& prior, const SeedSpec& seed, int n_max,
                                  const FitOptions& options)
{
    if (!point.converged)
        throw std::invalid_argument("parametric_bootstrap: point estimate did not converge");
    if (n_b < 2)
        throw std::invalid_argument("parametric_bootstrap: need at least 2 replicates");
    if (n_shots < 1)
        throw std::invalid_argument("parametric_bootstrap: n_shots must be >= 1");
    require_valid(prior);

    const FockDistribution model = fock_distribution(point.variances, n_max);
    ReplicateSet set;
    set.records.resize(static_cast<std::size_t>(n_b));
    parallel_for(set.records.size(), [&](std::size_t i) {
        const FockHistogram h = sample_histogram(model, n_shots, seed.child(i));
        const FitResult refit = fit(h, posterior_weights(h, prior), options);
        set.records[i] = {estimates_of(refit), refit.converged};
    });

    set.failures = static_cast<int>(std::count_if(
        set.records.begin(), set.records.end(), [](const auto& r) { return !r.converged; }));
    if (100 * set.failures > n_b)
        throw BootstrapError("parametric_bootstrap: " + std::to_string(set.failures) + " of " +
                             std::to_string(n_b) + " refits failed to converge (limit 1%)");
    return set;
}

namespace {

void require_interval_inputs(std::span<const double> sorted, double alpha)
{
    if (sorted.empty())
        throw std::invalid_argument("confidence interval: no replicates");
    if (!(alpha > 0.0 && alpha < 0.5))
        throw std::invalid_argument("confidence interval: alpha must lie in (0, 0.5)");
    if (!std::is_sorted(sorted.begin(), sorted.end()))
        throw std::invalid_argument("confidence interval: replicates must be sorted ascending");
}

// Order statistic at 1-based position `index`, clamped to [1, N].
double order_statistic(std::span<const double> sorted, long index)
{
    const long n = static_cast<long>(sorted.size());
    return sorted[static_cast<std::size_t>(std::clamp(index, 1L, n) - 1)];
}

// Linear interpolation between adjacent order statistics at a real 1-based position.
double interpolated_statistic(std::span<const double> sorted, double position)
{
    const double n = static_cast<double>(sorted.size());
    if (position <= 1.0)
        return sorted.front();
    if (position >= n)
        return sorted.back();
    const double base = std::floor(position);
    const double frac = position - base;
    const double lo = order_statistic(sorted, static_cast<long>(base));
    const double hi = order_statistic(sorted, static_cast<long>(base) + 1);
    return lo + frac * (hi - lo);
}

// Tolerates N_B * alpha landing a rounding error below an integer.
long floor_index(double x)
{
    return static_cast<long>(std::floor(x + 1e-9));
}

} // namespace

ConfidenceInterval percentile_interval(std::span<const double> sorted, double alpha,
                                       Parameter parameter)
{
    require_interval_inputs(sorted, alpha);
    const double n = static_cast<double>(sorted.size());
    ConfidenceInterval ci;
    ci.parameter = parameter;
    ci.method = IntervalMethod::percentile;
    ci.level = 1.0 - 2.0 * alpha;
    ci.lower = order_statistic(sorted, floor_index(n * alpha));
    ci.upper = order_statistic(sorted, floor_index(n * (1.0 - alpha)));
    return ci;
}

ConfidenceInterval bc_interval(std::span<const double> sorted, double point_estimate,
                               double alpha, Parameter parameter)
{
    require_interval_inputs(sorted, alpha);
    const auto n_b = static_cast<long>(sorted.size());
    ConfidenceInterval ci;
    ci.parameter = parameter;
    ci.method = IntervalMethod::bc;
    ci.level = 1.0 - 2.0 * alpha;

    if (n_b < 2) {
        ci.lower = ci.upper = sorted.front();
        return ci;
    }
    const long below = static_cast<long>(
        std::upper_bound(sorted.begin(), sorted.end(), point_estimate) - sorted.begin());
    const long p_ci = std::clamp(below, 1L, n_b - 1);
    const double b = std_normal_quantile(static_cast<double>(p_ci) / static_cast<double>(n_b));
    const double level_lo = std_normal_cdf(2.0 * b + std_normal_quantile(alpha));
    const double level_hi = std_normal_cdf(2.0 * b + std_normal_quantile(1.0 - alpha));
    ci.lower = interpolated_statistic(sorted, static_cast<double>(n_b) * level_lo);
    ci.upper = interpolated_statistic(sorted, static_cast<double>(n_b) * level_hi);
    return ci;
}

ConfidenceInterval make_interval(const ReplicateSet& replicates, const ParameterEstimates& point,
                                 Parameter parameter, IntervalMethod method, double alpha)
{
    const std::vector<double> values = replicates.sorted(parameter);
    return method == IntervalMethod::bc ? bc_interval(values, point[parameter], alpha, parameter)
                                        : percentile_interval(values, alpha, parameter);
}

CoverageRun coverage_probability(const SqueezedThermalState& truth, std::int64_t n_shots,
                                 int n_experiments, int n_b, double alpha,
                                 std::span<const IntervalMethod> methods, const PriorShape& prior,
                                 const SeedSpec& seed, int n_max, const FitOptions& options)
{
    require_valid(truth);
    if (n_shots < 1 || n_experiments < 1 || n_b < 2)
        throw std::invalid_argument("coverage_probability: counts must be positive, n_b >= 2");
    if (methods.empty())
        throw std::invalid_argument("coverage_probability: no interval methods requested");

    const FockDistribution model = fock_distribution(to_variances(truth), n_max);
    const ParameterEstimates true_values = estimates_of(truth);

    struct Outcome {
        FitResult point;
        // hit[m][p]: interval of method m for parameter p contains the truth
        std::vector<std::array<bool, 4>> hit;
    };
    std::vector<Outcome> outcomes(static_cast<std::size_t>(n_experiments));

    parallel_for(outcomes.size(), [&](std::size_t e) {
        const SeedSpec experiment_seed = seed.child(e);
        const FockHistogram data = sample_histogram(model, n_shots, experiment_seed);
        Outcome& out = outcomes[e];
        out.point = fit(data, posterior_weights(data, prior), options);
        if (!out.point.converged)
            return;
        const ReplicateSet replicates = parametric_bootstrap(out.point, n_shots, n_b, prior,
                                                             experiment_seed, n_max, options);
        const ParameterEstimates point = estimates_of(out.point);
        for (IntervalMethod m : methods) {
            std::array<bool, 4> hits{};
            for (Parameter p : kAllParameters)
                hits[static_cast<std::size_t>(p)] =
                    make_interval(replicates, point, p, m, alpha).contains(true_values[p]);
            out.hit.push_back(hits);
        }
    });

    CoverageRun run;
    for (const auto& o : outcomes) {
        run.point_estimates.push_back(o.point);
        if (!o.point.converged)
            ++run.failed_fits;
    }
    const int used = n_experiments - run.failed_fits;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        CoverageResult result;
        result.method = methods[m];
        result.n_b = n_b;
        result.n_experiments = used;
        for (Parameter p : kAllParameters) {
            const auto idx = static_cast<std::size_t>(p);
            int hits = 0;
            for (const auto& o : outcomes)
                if (!o.hit.empty() && o.hit[m][idx])
                    ++hits;
            const double frac = used > 0 ? static_cast<double>(hits) / used : 0.0;
            result.coverage[idx] = {frac, used > 0 ? std::sqrt(frac * (1.0 - frac) / used) : 0.0};
        }
        run.results.push_back(result);
    }
    return run;
}

} // namespace fockfit

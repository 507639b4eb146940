#pragma once

#include "fockfit/estimation.hpp"
#include "fockfit/sampling.hpp"

#include <array>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace fockfit {

enum class Parameter { vq, vp, r, nbar };
enum class IntervalMethod { percentile, bc };

inline constexpr std::array<Parameter, 4> kAllParameters{Parameter::vq, Parameter::vp,
                                                         Parameter::r, Parameter::nbar};

std::string_view to_string(Parameter p);
std::string_view to_string(IntervalMethod m);
Parameter parameter_from_string(std::string_view name);
IntervalMethod interval_method_from_string(std::string_view name);

/// The four reported parameters of one estimate.
struct ParameterEstimates {
    double vq = 0.5;
    double vp = 0.5;
    double r = 0.0;
    double nbar = 0.0;

    double operator[](Parameter p) const;
};

ParameterEstimates estimates_of(const QuadratureVariances& v, const SqueezedThermalState& s);
ParameterEstimates estimates_of(const FitResult& fit);
ParameterEstimates estimates_of(const SqueezedThermalState& s);

struct ReplicateRecord {
    ParameterEstimates estimate;
    bool converged = true;
};

/// Bootstrap refits, indexed by replicate.
struct ReplicateSet {
    std::vector<ReplicateRecord> records;
    int failures = 0;

    int n_b() const { return static_cast<int>(records.size()); }
    /// Converged replicate values of one parameter, ascending.
    std::vector<double> sorted(Parameter p) const;
};

struct ConfidenceInterval {
    Parameter parameter = Parameter::nbar;
    IntervalMethod method = IntervalMethod::percentile;
    double level = 0.9;
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double value) const { return lower <= value && value <= upper; }
};

/// Raised when more than 1% of bootstrap refits fail to converge.
class BootstrapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** Parametric bootstrap around a converged point estimate.
 *
 *  Replicate i samples n_shots events from the fitted distribution using the
 *  stream seed.child(i) and refits with posterior weights. Results are stored
 *  by replicate index, so they do not depend on the thread schedule.
 */
ReplicateSet parametric_bootstrap(const FitResult& point, std::int64_t n_shots, int n_b,
                                  const PriorShape& prior, const SeedSpec& seed,
                                  int n_max = kDefaultNMax, const FitOptions& options = {});

/** Percentile interval [theta_l, theta_m] with l = floor(N_B alpha) and
 *  m = floor(N_B (1 - alpha)), 1-based and clamped to [1, N_B].
 */
ConfidenceInterval percentile_interval(std::span<const double> sorted, double alpha,
                                       Parameter parameter);

/** Bias-corrected percentile interval.
 *
 *  b = Phi^{-1}(p_ci / N_B), p_ci = #{theta*_i <= point} clamped to [1, N_B - 1].
 *  Endpoints are the order statistics at levels Phi(2b + z_alpha) and
 *  Phi(2b + z_{1-alpha}), linearly interpolated in the 1-based position N_B * level.
 */
ConfidenceInterval bc_interval(std::span<const double> sorted, double point_estimate,
                               double alpha, Parameter parameter);

ConfidenceInterval make_interval(const ReplicateSet& replicates, const ParameterEstimates& point,
                                 Parameter parameter, IntervalMethod method, double alpha);

struct CoverageEntry {
    double fraction = 0.0;
    double standard_error = 0.0;
};

struct CoverageResult {
    IntervalMethod method = IntervalMethod::percentile;
    int n_b = 0;
    int n_experiments = 0;
    std::array<CoverageEntry, 4> coverage{}; ///< indexed as kAllParameters

    const CoverageEntry& operator[](Parameter p) const
    {
        return coverage[static_cast<std::size_t>(p)];
    }
};

struct CoverageRun {
    std::vector<CoverageResult> results;      ///< one per requested method
    std::vector<FitResult> point_estimates;   ///< one per experiment
    int failed_fits = 0;
};

/** Simulate n_experiments data sets from the true state, fit each, bootstrap
 *  it and record whether each interval contains the truth. All methods are
 *  evaluated on the same replicates. Experiment e draws its data from
 *  seed.child(e) and its replicates from seed.child(e).child(i).
 */
CoverageRun coverage_probability(const SqueezedThermalState& truth, std::int64_t n_shots,
                                 int n_experiments, int n_b, double alpha,
                                 std::span<const IntervalMethod> methods, const PriorShape& prior,
                                 const SeedSpec& seed, int n_max = kDefaultNMax,
                                 const FitOptions& options = {});

} // namespace fockfit

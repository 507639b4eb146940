#pragma once

#include "fockfit/gaussian_model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fockfit {

/// Observed Fock counts k_0..k_{n_max} plus the count of events above n_max.
struct FockHistogram {
    int n_max = kDefaultNMax;
    std::vector<std::int64_t> counts;
    std::int64_t overflow_count = 0;
    std::int64_t total = 0;

    Eigen::Index bin_count() const { return static_cast<Eigen::Index>(counts.size()) + 1; }

    /// k_n / N for every bin, overflow last.
    Eigen::ArrayXd frequencies() const;
    /// Counts for every bin, overflow last.
    Eigen::ArrayXd bin_counts() const;
};

bool is_valid(const FockHistogram& h);
void require_valid(const FockHistogram& h);

/// Beta(nu, eta) prior shape parameters.
struct PriorShape {
    double nu = 1.0;
    double eta = 1.0;
};

void require_valid(const PriorShape& prior);

/// One weight per histogram bin, overflow last.
using WeightVector = Eigen::ArrayXd;

enum class WeightScheme { posterior, mle, uniform };

std::string_view to_string(WeightScheme scheme);
/// Throws std::invalid_argument on an unknown name.
WeightScheme weight_scheme_from_string(std::string_view name);

/// w_n = 1 / Var(p_n | k_n) under a Beta(nu, eta) prior; finite for k_n = 0.
WeightVector posterior_weights(const FockHistogram& h, const PriorShape& prior);

/// w_n = N^3 / (k_n (N - k_n)), with k_n and N - k_n floored at 1/2.
WeightVector mle_weights(const FockHistogram& h);

WeightVector uniform_weights(const FockHistogram& h);

WeightVector make_weights(const FockHistogram& h, WeightScheme scheme,
                          const PriorShape& prior = {});

/// Sum of w_n (P(n | v) - f_n)^2 over all bins including overflow.
double objective(const QuadratureVariances& v, const FockHistogram& h, const WeightVector& w);

/// Same objective against arbitrary observed frequencies (length n_max + 2).
double objective(const QuadratureVariances& v, const Eigen::ArrayXd& frequencies,
                 const WeightVector& w);

struct FitOptions {
    double r_max = 3.5;          ///< upper end of the coarse r grid
    double one_plus_nbar_max = 8.0; ///< upper end of the coarse (1 + nbar) grid
    int grid_r = 60;
    int grid_nbar = 60;
    double tolerance = 1e-9;     ///< simplex extent per coordinate at convergence
    int max_evaluations = 10000;
};

struct FitResult {
    QuadratureVariances variances;
    SqueezedThermalState state;
    double objective = 0.0;
    bool converged = false;
    int evaluations = 0;
};

/** Weighted least-squares fit of (vq, vp).
 *
 *  The search runs in (r, nbar) where the physical constraints reduce to
 *  r >= 0, nbar >= 0: a coarse grid followed by a bounded Nelder-Mead
 *  refinement from the best grid point.
 */
FitResult fit(const FockHistogram& h, const WeightVector& w, const FitOptions& options = {});

/// Fit against observed frequencies (length n_max + 2, overflow last).
FitResult fit(const Eigen::ArrayXd& frequencies, const WeightVector& w,
              const FitOptions& options = {});

} // namespace fockfit

#pragma once

#include "fockfit/bootstrap.hpp"
#include "fockfit/estimation.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fockfit {

/// One weighting choice: scheme plus prior (the prior only matters for posterior).
struct SchemeSpec {
    WeightScheme scheme = WeightScheme::posterior;
    PriorShape prior;
};

struct StudyConfig {
    std::vector<SqueezedThermalState> true_states;
    std::vector<std::int64_t> shot_counts;
    int n_experiments = 100;
    std::vector<int> n_b{1000};
    double alpha = 0.05;
    PriorShape prior;
    WeightScheme weight_scheme = WeightScheme::posterior;
    /// Schemes compared by weight_comparison_study; empty means {weight_scheme, prior}.
    std::vector<SchemeSpec> schemes;
    std::vector<IntervalMethod> methods{IntervalMethod::percentile, IntervalMethod::bc};
    int n_max = kDefaultNMax;
    std::uint64_t master_seed = 0;
    /// Fit exact model probabilities instead of sampled counts.
    bool exact = false;
    FitOptions fit_options;
};

/// Default shot grid 10^2 .. 10^5 in half decades.
std::vector<std::int64_t> default_shot_grid();

void require_valid(const StudyConfig& cfg);

struct ParameterStats {
    double truth = 0.0;
    double mean = 0.0;
    double bias = 0.0;
    double std_dev = 0.0;
    double bias_over_std = 0.0;
};

struct StudyRow {
    SqueezedThermalState state;
    std::int64_t shots = 0;
    SchemeSpec scheme;
    int n_experiments = 0;
    int n_failed = 0;
    double mean_fidelity = 0.0;
    double std_fidelity = 0.0;
    double mean_infidelity = 0.0;
    double std_infidelity = 0.0;
    std::array<ParameterStats, 4> parameters{}; ///< indexed as kAllParameters
    std::optional<IntervalMethod> method;       ///< set on coverage rows
    int n_b = 0;
    std::array<CoverageEntry, 4> coverage{};

    const ParameterStats& operator[](Parameter p) const
    {
        return parameters[static_cast<std::size_t>(p)];
    }
};

struct StudyReport {
    std::vector<StudyRow> rows;

    int failed_fits() const;
};

/// Seed of experiment e for (state index, shot index); shared by every scheme.
SeedSpec experiment_seed(std::uint64_t master_seed, std::size_t state_index,
                         std::size_t shot_index, std::size_t experiment);

/// Mean and sample std of the fidelity to the truth, per (state, N).
StudyReport fidelity_study(const StudyConfig& cfg);

/// Bias, std and bias/std of r, vp, vq, nbar, per (state, N).
StudyReport bias_study(const StudyConfig& cfg);

/// Bootstrap coverage per (state, N, N_B, method).
StudyReport coverage_study(const StudyConfig& cfg);

/// fidelity_study repeated for every scheme on identical simulated data.
StudyReport weight_comparison_study(const StudyConfig& cfg);

} // namespace fockfit

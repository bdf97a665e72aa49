#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "unravel/ensemble.hpp"

namespace unravel::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitRuntimeError = 1,
    kExitInvalidInput = 2,
    kExitThresholdViolated = 3,
};

struct CommandOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_traj;
    std::optional<Unraveling> unraveling;
    std::size_t trajectory = 0;  // functionals: trajectory index under the master seed
    std::size_t workers = 0;     // 0 = workers_from_env()
};

/// UNRAVEL_THREADS if set to a positive integer, else hardware concurrency.
std::size_t workers_from_env();

/// Pass/fail limits of cmd_compare, in the units of ComparisonReport.
struct CompareThresholds {
    double max_trace_distance = 0.02;
    double max_p_residual_se = 5.0;
    double max_projector_residual_se = 5.0;
    double min_jensen_gap_se = -5.0;
    double max_second_moment_residual_se = 5.0;
    double max_measurement_entropy_agreement_se = 5.0;
};

/// Applies the option overrides to `config` and validates the result.
EnsembleConfig apply_options(EnsembleConfig config, const CommandOptions& options);

/// master.csv: density-matrix entries, outcome probabilities, S_vN and S_A.
int cmd_master(const EnsembleConfig& config, const CommandOptions& options);

/// ensemble.csv, second_moment.csv and ensemble_summary.json for the
/// configured unraveling.
int cmd_ensemble(const EnsembleConfig& config, const CommandOptions& options);

/// Master solution against both unravelings: compare_<tag>.csv,
/// second_moment_<tag>.csv, discrepancy.csv and compare_summary.json.
/// Returns kExitThresholdViolated when any threshold fails.
int cmd_compare(const EnsembleConfig& config, const CommandOptions& options,
                const CompareThresholds& thresholds = {});

/// Per-trajectory entropy, corrections and f along trajectory
/// `options.trajectory`: functionals.csv, jumps.csv, functionals_summary.json.
int cmd_functionals(const EnsembleConfig& config, const CommandOptions& options);

}  // namespace unravel::cli

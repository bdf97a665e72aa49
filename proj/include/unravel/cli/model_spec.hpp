#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "unravel/ensemble.hpp"

namespace unravel::cli {

/// Rejected model file; the message starts with the JSON path of the
/// offending field, e.g. "$.hamiltonian[0][1]".
class SpecError : public std::runtime_error {
public:
    SpecError(std::string path, const std::string& what);
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Strict reader of the JSON model format:
///
///   {
///     "dim": 2,
///     "hamiltonian": [[[re, im], ...], ...],
///     "lindblad_ops": [ <matrix>, ... ],                 (optional, default [])
///     "measurement": { "effects": [ <matrix>, ... ],
///                      "eigenvalues": [ ... ] },         (eigenvalues optional)
///     "initial_state": [[re, im], ...],
///     "grid": { "t0": 0, "dt": 0.001, "steps": 2000 },   (dt optional)
///     "ensemble": { "n_traj": 10000, "seed": 1,
///                   "unraveling": "wiener" | "poisson" } (optional)
///   }
///
/// Unknown keys are rejected. Hermiticity, completeness and normalization
/// are checked at 1e-8; accepted values are then symmetrized/renormalized.
EnsembleConfig parse_model(const std::filesystem::path& path);
EnsembleConfig parse_model_json(const nlohmann::json& doc);

/// Inverse of parse_model_json.
nlohmann::json to_json(const EnsembleConfig& config);

/// Built-in models: "damping" (H = 0, L = sigma_-) and "rabi"
/// (H = sigma_x, L = sigma_-), both from |e> on t in [0, 2], dt = 1e-3,
/// measured in the {|g>, |e>} basis with 10^4 trajectories.
EnsembleConfig preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace unravel::cli

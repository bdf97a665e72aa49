#pragma once

#include <cstddef>
#include <cstdint>

#include "unravel/rng.hpp"
#include "unravel/trajectory.hpp"

namespace unravel {

/// Increment of the complex Wiener process, one component per Lindblad
/// operator: sqrt(dt) (xi + i eta) with xi, eta independent standard normals,
/// so that E[dW_i dW_j] = 0 and E[dW_i^* dW_j] = 2 delta_ij dt.
struct ComplexNoiseIncrement {
    ComplexVector values;
    double dt = 0.0;
};

ComplexNoiseIncrement sample_complex_noise(Engine& engine, std::size_t channels, double dt);

/// dt-coefficient of the Gisin-Percival equation:
/// -iH psi + sum_j (<L_j^dag> L_j - 1/2 L_j^dag L_j - 1/2 |<L_j>|^2) psi
ComplexVector gp_drift(const LindbladModel& model, const StateVector& psi);

/// dW_j-coefficient: (L_j - <L_j>) psi / sqrt(2)
ComplexVector gp_diffusion(const LindbladModel& model, const StateVector& psi, std::size_t channel);

struct StepDiagnostics {
    double norm_before = 1.0;  // ||psi'|| before renormalization
};

/// Euler-Maruyama step followed by projection back onto the unit sphere.
/// Throws InvariantError if the pre-renormalization norm leaves [0.5, 1.5].
StateVector gp_step(const LindbladModel& model, const StateVector& psi, const ComplexNoiseIncrement& noise,
                    StepDiagnostics* diagnostics = nullptr);

/// Streams the trajectory for `seed` into `observer` without storing it.
/// Returns the largest | ||psi||^2 - 1 | seen before renormalization.
double simulate_gp(const LindbladModel& model, const StateVector& psi0, const TimeGrid& grid, std::uint64_t seed,
                   TrajectoryObserver& observer);

TrajectoryRecord gp_trajectory(const LindbladModel& model, const StateVector& psi0, const TimeGrid& grid,
                               std::uint64_t seed);

}  // namespace unravel

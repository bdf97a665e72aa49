#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "unravel/rng.hpp"
#include "unravel/trajectory.hpp"

namespace unravel {

/// Rates below this are treated as exactly zero: the channel is dark.
inline constexpr double kDarkRate = 1e-12;

/// Deterministic flow between jumps:
/// -(iH + 1/2 sum_j (L_j^dag L_j - <L_j^dag L_j>)) psi
ComplexVector pdp_drift(const LindbladModel& model, const StateVector& psi);

/// rate_j = <L_j^dag L_j>, clamped at zero (and zeroed below kDarkRate).
RealVector jump_rates(const LindbladModel& model, const StateVector& psi);

/// psi -> L_j psi / ||L_j psi||. Throws InvariantError when channel j is dark.
StateVector apply_jump(const LindbladModel& model, const StateVector& psi, std::size_t channel);

struct PdpStepResult {
    StateVector state;
    std::optional<JumpEvent> jump;
    double norm_before = 1.0;  // after RK4, before renormalization; 1 on jump steps
};

/// One step of first-order thinning over [t, t + dt]. Channel j fires when
/// draws[j] < rate_j dt; the lowest firing index wins. Without a jump the
/// drift is integrated with RK4 and the result renormalized.
/// Throws std::invalid_argument when sum_j rate_j dt > 0.1.
PdpStepResult pdp_step(const LindbladModel& model, const StateVector& psi, double dt, std::span<const double> draws,
                       double t = 0.0);

/// Streams the trajectory for `seed` into `observer`. Returns the largest
/// | ||psi||^2 - 1 | seen before renormalization.
double simulate_pdp(const LindbladModel& model, const StateVector& psi0, const TimeGrid& grid, std::uint64_t seed,
                    TrajectoryObserver& observer);

TrajectoryRecord pdp_trajectory(const LindbladModel& model, const StateVector& psi0, const TimeGrid& grid,
                                std::uint64_t seed);

/// Time of the first jump of the trajectory for `seed`, or nothing if none
/// happens before `max_time`.
std::optional<double> sample_first_jump(const LindbladModel& model, const StateVector& psi0, double dt,
                                        double max_time, std::uint64_t seed);

}  // namespace unravel

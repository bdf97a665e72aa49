#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "unravel/master.hpp"
#include "unravel/quantum_core.hpp"

namespace unravel {

/// A jump of channel `channel`, stored with both one-sided limits of the state.
struct JumpEvent {
    double time = 0.0;
    std::size_t channel = 0;
    StateVector pre_state;   // psi(t-)
    StateVector post_state;  // psi(t) = L_j psi(t-) / ||L_j psi(t-)||
};

/// Sampled unraveling path. `states[k]` is the state at grid.time(k); for the
/// jump unraveling it is the post-jump state when a jump lands on that point.
struct TrajectoryRecord {
    TimeGrid grid;
    std::vector<StateVector> states;
    std::uint64_t seed = 0;
    std::vector<JumpEvent> jumps;
    /// max over steps of | ||psi||^2 - 1 | before renormalization
    double max_norm_drift = 0.0;
};

/// Receives every grid state of a trajectory as it is produced.
class TrajectoryObserver {
public:
    virtual ~TrajectoryObserver() = default;
    virtual void on_state(std::size_t k, const StateVector& psi) = 0;
    /// Called before on_state for the grid point the jump lands on.
    virtual void on_jump(const JumpEvent&) {}
};

/// Appends every state and jump to a TrajectoryRecord.
class RecordingObserver : public TrajectoryObserver {
public:
    explicit RecordingObserver(TrajectoryRecord& record) : record_(record) {}
    void on_state(std::size_t, const StateVector& psi) override { record_.states.push_back(psi); }
    void on_jump(const JumpEvent& event) override { record_.jumps.push_back(event); }

private:
    TrajectoryRecord& record_;
};

/// Time-step policy: max_j ||L_j||^2 dt above this is rejected.
inline constexpr double kMaxRateStep = 0.1;
/// Default step keeps max_j ||L_j||^2 dt at this level.
inline constexpr double kDefaultRateStep = 1e-2;

/// Largest step satisfying the default policy, capped at 1e-2 for models
/// without dissipation.
double default_time_step(const LindbladModel& model);

/// Throws std::invalid_argument when max_j ||L_j||^2 dt > kMaxRateStep.
void check_time_step(const LindbladModel& model, double dt);

}  // namespace unravel

#include "unravel/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

namespace unravel {

namespace {

constexpr double kMaxJumpProbability = 0.1;

void require_state_dim(const LindbladModel& model, const StateVector& psi)
{
    if (psi.dim() != model.dim()) throw DimensionError("state and model dimensions differ");
}

/// pdp_drift for an arbitrary non-zero vector; expectations are Rayleigh
/// quotients so RK4 stages need not be normalized.
ComplexVector drift_unnormalized(const LindbladModel& model, const ComplexVector& phi)
{
    const Complex i_unit(0.0, 1.0);
    const ComplexVector b_phi = model.total_jump_product() * phi;
    const double mean_b = phi.dot(b_phi).real() / phi.squaredNorm();
    return -i_unit * (model.hamiltonian() * phi) - 0.5 * b_phi + 0.5 * mean_b * phi;
}

double clamp_rate(double r)
{
    return r < kDarkRate ? 0.0 : r;
}

}  // namespace

ComplexVector pdp_drift(const LindbladModel& model, const StateVector& psi)
{
    require_state_dim(model, psi);
    return drift_unnormalized(model, psi.amplitudes());
}

RealVector jump_rates(const LindbladModel& model, const StateVector& psi)
{
    require_state_dim(model, psi);
    RealVector rates(static_cast<Eigen::Index>(model.channels()));
    for (std::size_t j = 0; j < model.channels(); ++j) {
        const ComplexVector l_psi = model.lindblad_op(j) * psi.amplitudes();
        rates(static_cast<Eigen::Index>(j)) = clamp_rate(l_psi.squaredNorm());
    }
    return rates;
}

StateVector apply_jump(const LindbladModel& model, const StateVector& psi, std::size_t channel)
{
    require_state_dim(model, psi);
    if (channel >= model.channels()) throw DimensionError("jump channel out of range");
    const ComplexVector l_psi = model.lindblad_op(channel) * psi.amplitudes();
    const double rate = l_psi.squaredNorm();
    if (rate < kDarkRate) {
        std::ostringstream msg;
        msg << "jump requested on dark channel " << channel << " (rate " << rate << ")";
        throw InvariantError(msg.str());
    }
    return StateVector(l_psi / std::sqrt(rate));
}

PdpStepResult pdp_step(const LindbladModel& model, const StateVector& psi, double dt, std::span<const double> draws,
                       double t)
{
    require_state_dim(model, psi);
    if (draws.size() != model.channels()) throw DimensionError("pdp_step needs one uniform draw per channel");
    const RealVector rates = jump_rates(model, psi);
    const double total = rates.sum() * dt;
    if (total > kMaxJumpProbability) {
        std::ostringstream msg;
        msg << "time step " << dt << " too large: total jump probability per step " << total << " exceeds "
            << kMaxJumpProbability;
        throw std::invalid_argument(msg.str());
    }
    for (std::size_t j = 0; j < model.channels(); ++j) {
        if (draws[j] < rates(static_cast<Eigen::Index>(j)) * dt) {
            StateVector post = apply_jump(model, psi, j);
            JumpEvent event{t + dt, j, psi, post};
            return PdpStepResult{std::move(post), std::move(event), 1.0};
        }
    }

    const ComplexVector& y = psi.amplitudes();
    const ComplexVector k1 = drift_unnormalized(model, y);
    const ComplexVector k2 = drift_unnormalized(model, y + 0.5 * dt * k1);
    const ComplexVector k3 = drift_unnormalized(model, y + 0.5 * dt * k2);
    const ComplexVector k4 = drift_unnormalized(model, y + dt * k3);
    const ComplexVector next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double norm = next.norm();
    if (!(norm >= 0.5 && norm <= 1.5)) {
        std::ostringstream msg;
        msg << "deterministic flow produced norm " << norm << "; reduce dt";
        throw InvariantError(msg.str());
    }
    return PdpStepResult{StateVector(next / norm), std::nullopt, norm};
}

double simulate_pdp(const LindbladModel& model, const StateVector& psi0, const TimeGrid& grid, std::uint64_t seed,
                    TrajectoryObserver& observer)
{
    require_state_dim(model, psi0);
    check_time_step(model, grid.dt);
    Engine engine = make_engine(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> draws(model.channels());
    StateVector psi = psi0;
    double max_drift = 0.0;
    observer.on_state(0, psi);
    for (std::size_t k = 1; k <= grid.steps; ++k) {
        for (auto& u : draws) u = uniform(engine);
        PdpStepResult step = pdp_step(model, psi, grid.dt, draws, grid.time(k - 1));
        max_drift = std::max(max_drift, std::abs(step.norm_before * step.norm_before - 1.0));
        if (step.jump) {
            step.jump->time = grid.time(k);
            observer.on_jump(*step.jump);
        }
        psi = std::move(step.state);
        observer.on_state(k, psi);
    }
    return max_drift;
}

TrajectoryRecord pdp_trajectory(const LindbladModel& model, const StateVector& psi0, const TimeGrid& grid,
                                std::uint64_t seed)
{
    TrajectoryRecord record;
    record.grid = grid;
    record.seed = seed;
    record.states.reserve(grid.points());
    RecordingObserver observer(record);
    record.max_norm_drift = simulate_pdp(model, psi0, grid, seed, observer);
    return record;
}

std::optional<double> sample_first_jump(const LindbladModel& model, const StateVector& psi0, double dt,
                                        double max_time, std::uint64_t seed)
{
    require_state_dim(model, psi0);
    check_time_step(model, dt);
    Engine engine = make_engine(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> draws(model.channels());
    StateVector psi = psi0;
    const auto max_steps = static_cast<std::size_t>(std::ceil(max_time / dt));
    for (std::size_t k = 1; k <= max_steps; ++k) {
        for (auto& u : draws) u = uniform(engine);
        PdpStepResult step = pdp_step(model, psi, dt, draws);
        if (step.jump) return static_cast<double>(k) * dt;
        psi = std::move(step.state);
    }
    return std::nullopt;
}

}  // namespace unravel

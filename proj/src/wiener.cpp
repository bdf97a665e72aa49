#include "unravel/wiener.hpp"

#include <cmath>
#include <sstream>

namespace unravel {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void require_state_dim(const LindbladModel& model, const StateVector& psi)
{
    if (psi.dim() != model.dim()) throw DimensionError("state and model dimensions differ");
}

/// drift*dt + sum_j diffusion_j dW_j, sharing L_j psi between both terms.
ComplexVector gp_increment(const LindbladModel& model, const ComplexVector& psi, const ComplexNoiseIncrement& noise)
{
    const Complex i_unit(0.0, 1.0);
    ComplexVector drift = -i_unit * (model.hamiltonian() * psi);
    ComplexVector noise_part = ComplexVector::Zero(psi.size());
    for (std::size_t j = 0; j < model.channels(); ++j) {
        const ComplexVector l_psi = model.lindblad_op(j) * psi;
        const Complex mean_l = psi.dot(l_psi);
        drift += std::conj(mean_l) * l_psi - 0.5 * (model.jump_product(j) * psi) - 0.5 * std::norm(mean_l) * psi;
        noise_part += (kInvSqrt2 * noise.values(static_cast<Eigen::Index>(j))) * (l_psi - mean_l * psi);
    }
    return drift * noise.dt + noise_part;
}

}  // namespace

ComplexNoiseIncrement sample_complex_noise(Engine& engine, std::size_t channels, double dt)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexNoiseIncrement noise;
    noise.dt = dt;
    noise.values.resize(static_cast<Eigen::Index>(channels));
    const double scale = std::sqrt(dt);
    for (std::size_t j = 0; j < channels; ++j) {
        const double re = normal(engine);
        const double im = normal(engine);
        noise.values(static_cast<Eigen::Index>(j)) = Complex(scale * re, scale * im);
    }
    return noise;
}

ComplexVector gp_drift(const LindbladModel& model, const StateVector& psi)
{
    require_state_dim(model, psi);
    ComplexNoiseIncrement unit;
    unit.dt = 1.0;
    unit.values = ComplexVector::Zero(static_cast<Eigen::Index>(model.channels()));
    return gp_increment(model, psi.amplitudes(), unit);
}

ComplexVector gp_diffusion(const LindbladModel& model, const StateVector& psi, std::size_t channel)
{
    require_state_dim(model, psi);
    if (channel >= model.channels()) {
        throw DimensionError("channel " + std::to_string(channel) + " out of range (" +
                             std::to_string(model.channels()) + " channels)");
    }
    const ComplexVector& v = psi.amplitudes();
    const ComplexVector l_psi = model.lindblad_op(channel) * v;
    const Complex mean_l = v.dot(l_psi);
    return kInvSqrt2 * (l_psi - mean_l * v);
}

StateVector gp_step(const LindbladModel& model, const StateVector& psi, const ComplexNoiseIncrement& noise,
                    StepDiagnostics* diagnostics)
{
    require_state_dim(model, psi);
    if (static_cast<std::size_t>(noise.values.size()) != model.channels()) {
        throw DimensionError("noise increment has the wrong number of channels");
    }
    const ComplexVector next = psi.amplitudes() + gp_increment(model, psi.amplitudes(), noise);
    const double norm = next.norm();
    if (!(norm >= 0.5 && norm <= 1.5)) {
        std::ostringstream msg;
        msg << "Gisin-Percival step produced norm " << norm << " outside [0.5, 1.5]; reduce dt";
        throw InvariantError(msg.str());
    }
    if (diagnostics) diagnostics->norm_before = norm;
    return StateVector(next / norm);
}

double simulate_gp(const LindbladModel& model, const StateVector& psi0, const TimeGrid& grid, std::uint64_t seed,
                   TrajectoryObserver& observer)
{
    require_state_dim(model, psi0);
    check_time_step(model, grid.dt);
    Engine engine = make_engine(seed);
    StateVector psi = psi0;
    double max_drift = 0.0;
    observer.on_state(0, psi);
    StepDiagnostics diag;
    for (std::size_t k = 1; k <= grid.steps; ++k) {
        const ComplexNoiseIncrement noise = sample_complex_noise(engine, model.channels(), grid.dt);
        psi = gp_step(model, psi, noise, &diag);
        max_drift = std::max(max_drift, std::abs(diag.norm_before * diag.norm_before - 1.0));
        observer.on_state(k, psi);
    }
    return max_drift;
}

TrajectoryRecord gp_trajectory(const LindbladModel& model, const StateVector& psi0, const TimeGrid& grid,
                               std::uint64_t seed)
{
    TrajectoryRecord record;
    record.grid = grid;
    record.seed = seed;
    record.states.reserve(grid.points());
    RecordingObserver observer(record);
    record.max_norm_drift = simulate_gp(model, psi0, grid, seed, observer);
    return record;
}

}  // namespace unravel

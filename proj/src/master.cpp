#include "unravel/master.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace unravel {

namespace {

constexpr double kIntegratorDrift = 1e-6;

void require_model_dim(const LindbladModel& model, const OperatorMatrix& a, const char* what)
{
    const auto n = static_cast<Eigen::Index>(model.dim());
    if (a.rows() != n || a.cols() != n) {
        std::ostringstream msg;
        msg << what << ": operand is " << a.rows() << "x" << a.cols() << ", model dimension is " << n;
        throw DimensionError(msg.str());
    }
}

}  // namespace

TimeGrid::TimeGrid(double t0_, double dt_, std::size_t steps_)
    : t0(t0_), dt(dt_), steps(steps_)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be positive and finite");
    if (steps == 0) throw std::invalid_argument("time grid needs at least one step");
    if (!std::isfinite(t0)) throw std::invalid_argument("grid start time must be finite");
}

OperatorMatrix lindbladian(const LindbladModel& model, const OperatorMatrix& rho)
{
    require_model_dim(model, rho, "lindbladian");
    const Complex i_unit(0.0, 1.0);
    const OperatorMatrix& h = model.hamiltonian();
    OperatorMatrix out = -i_unit * (h * rho - rho * h);
    const OperatorMatrix& b = model.total_jump_product();
    out -= 0.5 * (b * rho + rho * b);
    for (const auto& l : model.lindblad_ops()) out += l * rho * l.adjoint();
    return out;
}

OperatorMatrix lindbladian(const LindbladModel& model, const DensityMatrix& rho)
{
    return lindbladian(model, rho.matrix());
}

OperatorMatrix adjoint_lindbladian(const LindbladModel& model, const OperatorMatrix& a)
{
    require_model_dim(model, a, "adjoint_lindbladian");
    const Complex i_unit(0.0, 1.0);
    const OperatorMatrix& h = model.hamiltonian();
    OperatorMatrix out = i_unit * (h * a - a * h);
    const OperatorMatrix& b = model.total_jump_product();
    out -= 0.5 * (b * a + a * b);
    for (const auto& l : model.lindblad_ops()) out += l.adjoint() * a * l;
    return out;
}

MasterSolution integrate_master(const LindbladModel& model, const DensityMatrix& rho0, const TimeGrid& grid)
{
    require_model_dim(model, rho0.matrix(), "integrate_master");
    MasterSolution sol;
    sol.grid = grid;
    sol.states.reserve(grid.points());
    sol.states.push_back(rho0);

    const double dt = grid.dt;
    OperatorMatrix rho = rho0.matrix();
    for (std::size_t k = 1; k <= grid.steps; ++k) {
        const OperatorMatrix k1 = lindbladian(model, rho);
        const OperatorMatrix k2 = lindbladian(model, OperatorMatrix(rho + 0.5 * dt * k1));
        const OperatorMatrix k3 = lindbladian(model, OperatorMatrix(rho + 0.5 * dt * k2));
        const OperatorMatrix k4 = lindbladian(model, OperatorMatrix(rho + dt * k3));
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const double herm = hermiticity_error(rho);
        const double trace_err = std::abs(rho.trace() - 1.0);
        const double lowest = min_eigenvalue(rho);
        if (!rho.allFinite() || herm > kIntegratorDrift || trace_err > kIntegratorDrift || lowest < -kIntegratorDrift) {
            std::ostringstream msg;
            msg << "master integration left the state space at t=" << grid.time(k) << " (hermiticity " << herm
                << ", trace error " << trace_err << ", min eigenvalue " << lowest << "); reduce dt";
            throw InvariantError(msg.str());
        }
        rho = 0.5 * (rho + rho.adjoint()).eval();
        rho /= rho.trace().real();
        sol.states.emplace_back(rho);
    }
    return sol;
}

double von_neumann_entropy(const DensityMatrix& rho)
{
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        s -= xlogx(std::clamp(solver.eigenvalues()(i), 0.0, 1.0));
    }
    return std::max(s, 0.0);
}

double measurement_entropy(const DensityMatrix& rho, const Measurement& meas)
{
    if (meas.dim() != rho.dim()) throw DimensionError("measurement_entropy: dimensions differ");
    double s = 0.0;
    for (const auto& p : meas.effects()) {
        const double q = std::clamp((rho.matrix() * p).trace().real(), 0.0, 1.0);
        s -= xlogx(q);
    }
    return s;
}

}  // namespace unravel

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "unravel/quantum_core.hpp"

namespace unravel {

/// Uniform time grid t0 + k*dt, k = 0..steps.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 1e-3;
    std::size_t steps = 1;

    TimeGrid() = default;
    TimeGrid(double t0_, double dt_, std::size_t steps_);

    double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
    double horizon() const { return static_cast<double>(steps) * dt; }
    std::size_t points() const { return steps + 1; }

    bool operator==(const TimeGrid&) const = default;
};

struct MasterSolution {
    TimeGrid grid;
    std::vector<DensityMatrix> states;  // one per grid point
};

/// L[rho] = -i[H, rho] - 1/2 sum_j (L_j^dag L_j rho + rho L_j^dag L_j - 2 L_j rho L_j^dag)
OperatorMatrix lindbladian(const LindbladModel& model, const OperatorMatrix& rho);
OperatorMatrix lindbladian(const LindbladModel& model, const DensityMatrix& rho);

/// Heisenberg-picture generator, the dual of `lindbladian` under Tr[A^dag B]:
/// L^dag[A] = i[H, A] - 1/2 sum_j (L_j^dag L_j A + A L_j^dag L_j - 2 L_j^dag A L_j)
OperatorMatrix adjoint_lindbladian(const LindbladModel& model, const OperatorMatrix& a);

/// Fixed-step RK4 for d rho/dt = L[rho]. Every stored state is re-Hermitized and
/// trace-renormalized; a drift of more than 1e-6 in Hermiticity, trace or
/// positivity before that correction throws InvariantError (dt too large).
MasterSolution integrate_master(const LindbladModel& model, const DensityMatrix& rho0, const TimeGrid& grid);

/// -Tr[rho ln rho] in nats, eigenvalues clamped to [0, 1].
double von_neumann_entropy(const DensityMatrix& rho);

/// -sum_i q_i ln q_i with q_i = Tr[rho P_i] clamped to [0, 1].
double measurement_entropy(const DensityMatrix& rho, const Measurement& meas);

/// x ln x with the continuous extension 0 at x = 0.
inline double xlogx(double x)
{
    return x > 0.0 ? x * std::log(x) : 0.0;
}

}  // namespace unravel

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "unravel/master.hpp"
#include "unravel/quantum_core.hpp"
#include "unravel/trajectory.hpp"

namespace unravel {

/// Probabilities at or below this floor are treated as boundary values.
inline constexpr double kProbabilityFloor = 1e-12;
/// Coupling numerators below this contribute nothing (x ln x -> 0).
inline constexpr double kNegligibleCoupling = 1e-15;
/// Coupling numerators above this on a boundary probability diverge.
inline constexpr double kDivergentCoupling = 1e-12;

/// An entropy correction diverges: some p_i sits at the floor while a
/// Lindblad channel still couples into outcome i.
class BoundaryDivergence : public std::domain_error {
public:
    BoundaryDivergence(std::size_t outcome, double probability, double coupling);

    std::size_t outcome() const { return outcome_; }

private:
    std::size_t outcome_;
};

/// -sum_i p_i ln p_i. Throws std::invalid_argument for entries outside
/// [0, 1] or a sum off by more than 1e-8.
double entropy(std::span<const double> p);
double entropy(const RealVector& p);

struct WienerProbabilityDrift {
    RealVector drift;           // <L^dag[P_i]>
    OperatorMatrix diffusion;   // (i, j): <P_i (L_j - <L_j>)> / sqrt(2), paired with dW_j
};

WienerProbabilityDrift probability_drift_wiener(const LindbladModel& model, const StateVector& psi,
                                                const Measurement& meas);

/// (i, j): <L_j^dag P_i L_j> / <L_j^dag L_j> - p_i, the change of p_i when
/// channel j fires. Zero for dark channels.
RealMatrix probability_jump_coefficients(const LindbladModel& model, const StateVector& psi, const Measurement& meas);

/// Per-state integrand of d E[p_i p_k] / dt, split into the part that follows
/// from the Heisenberg evolution of P_i and the quadratic-variation part
/// specific to the unraveling.
struct SecondMomentDrift {
    RealMatrix lindblad_part;
    RealMatrix ito_part;
    Unraveling unraveling = Unraveling::wiener;

    RealMatrix total() const { return lindblad_part + ito_part; }
};

SecondMomentDrift second_moment_drift(const LindbladModel& model, const StateVector& psi, const Measurement& meas,
                                      Unraveling tag);

/// Non-martingale dt-term in dS beyond the Heisenberg part, in nats per unit time.
struct EntropyCorrection {
    double value = 0.0;
    Unraveling unraveling = Unraveling::wiener;
};

/// Throws BoundaryDivergence when the correction is infinite.
EntropyCorrection entropy_correction(const LindbladModel& model, const StateVector& psi, const Measurement& meas,
                                     Unraveling tag);

/// f_t = sum_ij <L_j^dag P_i L_j> ln(<L_j^dag P_i L_j> / (<L_j^dag L_j> p_i)).
/// `expected_x` is the mean of the auxiliary variable X_ij = <L_j^dag P_i L_j> /
/// (<L_j^dag L_j> p_i) under weights <L_j^dag L_j> p_i / <B>; it equals 1.
struct FFunctional {
    double value = 0.0;
    double expected_x = 1.0;
    bool all_channels_dark = false;  // <B> ~ 0: f is 0 by convention
};

/// Throws BoundaryDivergence when f is infinite.
FFunctional f_functional(const LindbladModel& model, const StateVector& psi, const Measurement& meas);

/// S(t_k) = entropy(probabilities(psi(t_k))) along a stored trajectory.
std::vector<double> trajectory_entropy_series(const TrajectoryRecord& record, const Measurement& meas);

/// Every state-local quantity the functionals above are built from.
struct LocalQuantities {
    RealVector p;               // <P_i> (unclamped)
    RealVector heisenberg;      // <L^dag[P_i]>
    RealVector rates;           // <L_j^dag L_j>, dark channels zeroed
    OperatorMatrix centered;    // (i, j): <P_i (L_j - <L_j>)>
    RealMatrix sandwiched;      // (i, j): <L_j^dag P_i L_j>
};

enum class FunctionalStatus { ok, all_channels_dark, boundary_divergence };

struct FEvaluation {
    FunctionalStatus status = FunctionalStatus::ok;
    double value = 0.0;
    double expected_x = 1.0;
    std::size_t divergent_outcome = 0;
};

struct CorrectionEvaluation {
    FunctionalStatus status = FunctionalStatus::ok;
    double value = 0.0;
    std::size_t divergent_outcome = 0;
};

/// Model and measurement with the Heisenberg-evolved effects L^dag[P_i]
/// precomputed, for repeated evaluation along trajectories. Holds references:
/// `model` and `meas` must outlive it.
class MeasurementDynamics {
public:
    MeasurementDynamics(const LindbladModel& model, const Measurement& meas);

    const LindbladModel& model() const { return model_; }
    const Measurement& measurement() const { return meas_; }
    std::size_t outcomes() const { return meas_.outcomes(); }
    std::size_t channels() const { return model_.channels(); }
    const OperatorMatrix& heisenberg_effect(std::size_t i) const { return heisenberg_.at(i); }

    LocalQuantities evaluate(const ComplexVector& psi) const;
    LocalQuantities evaluate(const StateVector& psi) const { return evaluate(psi.amplitudes()); }

private:
    const LindbladModel& model_;
    const Measurement& meas_;
    std::vector<OperatorMatrix> heisenberg_;
};

RealMatrix jump_coefficients(const LocalQuantities& q);
SecondMomentDrift second_moment_drift(const LocalQuantities& q, Unraveling tag);
CorrectionEvaluation wiener_entropy_correction(const LocalQuantities& q);
FEvaluation evaluate_f(const LocalQuantities& q);

/// -sum_i x ln x with probabilities clamped to [0, 1]; no validation.
double shannon_entropy(const RealVector& p);

}  // namespace unravel

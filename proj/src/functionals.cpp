#include "unravel/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace unravel {

namespace {

std::string divergence_message(std::size_t outcome, double probability, double coupling)
{
    std::ostringstream msg;
    msg << "entropy correction diverges: p_" << outcome << " = " << probability << " at the floor while coupling "
        << coupling << " feeds it";
    return msg.str();
}

void require_compatible(const LindbladModel& model, const StateVector& psi, const Measurement& meas)
{
    if (psi.dim() != model.dim() || meas.dim() != model.dim()) {
        throw DimensionError("model, state and measurement dimensions differ");
    }
}

}  // namespace

BoundaryDivergence::BoundaryDivergence(std::size_t outcome, double probability, double coupling)
    : std::domain_error(divergence_message(outcome, probability, coupling)), outcome_(outcome)
{
}

double shannon_entropy(const RealVector& p)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) s -= xlogx(std::clamp(p(i), 0.0, 1.0));
    return s;
}

double entropy(std::span<const double> p)
{
    constexpr double kSlack = 1e-10;
    double sum = 0.0;
    double s = 0.0;
    for (double x : p) {
        if (!(x >= -kSlack && x <= 1.0 + kSlack)) {
            throw std::invalid_argument("entropy: probability " + std::to_string(x) + " outside [0, 1]");
        }
        sum += x;
        s -= xlogx(std::clamp(x, 0.0, 1.0));
    }
    if (std::abs(sum - 1.0) > tolerance::completeness) {
        throw std::invalid_argument("entropy: probabilities sum to " + std::to_string(sum));
    }
    return s;
}

double entropy(const RealVector& p)
{
    return entropy(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

// --- MeasurementDynamics -------------------------------------------------------

MeasurementDynamics::MeasurementDynamics(const LindbladModel& model, const Measurement& meas)
    : model_(model), meas_(meas)
{
    if (meas.dim() != model.dim()) throw DimensionError("measurement and model dimensions differ");
    heisenberg_.reserve(meas.outcomes());
    for (const auto& effect : meas.effects()) heisenberg_.push_back(adjoint_lindbladian(model, effect));
}

LocalQuantities MeasurementDynamics::evaluate(const ComplexVector& psi) const
{
    const auto n_out = static_cast<Eigen::Index>(meas_.outcomes());
    const auto n_ch = static_cast<Eigen::Index>(model_.channels());
    LocalQuantities q;
    q.p.resize(n_out);
    q.heisenberg.resize(n_out);
    q.rates.resize(n_ch);
    q.centered.resize(n_out, n_ch);
    q.sandwiched.resize(n_out, n_ch);

    std::vector<ComplexVector> p_psi(static_cast<std::size_t>(n_out));
    for (Eigen::Index i = 0; i < n_out; ++i) {
        p_psi[i] = meas_.effect(i) * psi;
        q.p(i) = psi.dot(p_psi[i]).real();
        q.heisenberg(i) = psi.dot(heisenberg_[i] * psi).real();
    }
    for (Eigen::Index j = 0; j < n_ch; ++j) {
        const ComplexVector l_psi = model_.lindblad_op(j) * psi;
        const Complex mean_l = psi.dot(l_psi);
        const double rate = l_psi.squaredNorm();
        q.rates(j) = rate < kProbabilityFloor ? 0.0 : rate;
        for (Eigen::Index i = 0; i < n_out; ++i) {
            q.centered(i, j) = p_psi[i].dot(l_psi) - mean_l * q.p(i);
            q.sandwiched(i, j) = std::max(0.0, l_psi.dot(meas_.effect(i) * l_psi).real());
        }
    }
    return q;
}

// --- evaluators on local quantities -------------------------------------------

RealMatrix jump_coefficients(const LocalQuantities& q)
{
    RealMatrix coef = RealMatrix::Zero(q.p.size(), q.rates.size());
    for (Eigen::Index j = 0; j < q.rates.size(); ++j) {
        if (q.rates(j) <= 0.0) continue;
        for (Eigen::Index i = 0; i < q.p.size(); ++i) coef(i, j) = q.sandwiched(i, j) / q.rates(j) - q.p(i);
    }
    return coef;
}

SecondMomentDrift second_moment_drift(const LocalQuantities& q, Unraveling tag)
{
    const Eigen::Index n = q.p.size();
    SecondMomentDrift out;
    out.unraveling = tag;
    out.lindblad_part = q.heisenberg * q.p.transpose() + q.p * q.heisenberg.transpose();
    out.ito_part = RealMatrix::Zero(n, n);
    if (tag == Unraveling::wiener) {
        // c_ij conj(c_kj) + conj(c_ij) c_kj = 2 Re(c_ij conj(c_kj))
        out.ito_part = 2.0 * (q.centered * q.centered.adjoint()).real();
    } else {
        const RealMatrix coef = jump_coefficients(q);
        out.ito_part = coef * q.rates.asDiagonal() * coef.transpose();
    }
    out.ito_part = 0.5 * (out.ito_part + out.ito_part.transpose()).eval();
    return out;
}

CorrectionEvaluation wiener_entropy_correction(const LocalQuantities& q)
{
    CorrectionEvaluation out;
    for (Eigen::Index i = 0; i < q.p.size(); ++i) {
        const double coupling = q.centered.row(i).squaredNorm();
        if (coupling < kNegligibleCoupling) continue;
        const double p = q.p(i);
        if (p <= kProbabilityFloor) {
            if (coupling > kDivergentCoupling) {
                out.status = FunctionalStatus::boundary_divergence;
                out.divergent_outcome = static_cast<std::size_t>(i);
                out.value = -std::numeric_limits<double>::infinity();
                return out;
            }
            continue;
        }
        out.value -= coupling / p;
    }
    return out;
}

FEvaluation evaluate_f(const LocalQuantities& q)
{
    FEvaluation out;
    const double total_rate = q.rates.sum();
    if (total_rate <= kProbabilityFloor) {
        out.status = FunctionalStatus::all_channels_dark;
        return out;
    }
    double f = 0.0;
    double expected_x = 0.0;
    for (Eigen::Index j = 0; j < q.rates.size(); ++j) {
        const double rate = q.rates(j);
        if (rate <= 0.0) continue;
        for (Eigen::Index i = 0; i < q.p.size(); ++i) {
            const double num = q.sandwiched(i, j);
            const double p = q.p(i);
            if (p <= kProbabilityFloor) {
                if (num > kDivergentCoupling) {
                    out.status = FunctionalStatus::boundary_divergence;
                    out.divergent_outcome = static_cast<std::size_t>(i);
                    out.value = std::numeric_limits<double>::infinity();
                    out.expected_x = std::numeric_limits<double>::quiet_NaN();
                    return out;
                }
                // limit of x_ij p_ij as p_i -> 0
                expected_x += num / total_rate;
                continue;
            }
            const double x = num / (rate * p);
            const double weight = rate * p / total_rate;
            expected_x += x * weight;
            if (num >= kNegligibleCoupling) f += num * std::log(x);
        }
    }
    out.value = f;
    out.expected_x = expected_x;
    return out;
}

// --- public per-state API -------------------------------------------------------

WienerProbabilityDrift probability_drift_wiener(const LindbladModel& model, const StateVector& psi,
                                                const Measurement& meas)
{
    require_compatible(model, psi, meas);
    const LocalQuantities q = MeasurementDynamics(model, meas).evaluate(psi);
    return WienerProbabilityDrift{q.heisenberg, q.centered / std::sqrt(2.0)};
}

RealMatrix probability_jump_coefficients(const LindbladModel& model, const StateVector& psi, const Measurement& meas)
{
    require_compatible(model, psi, meas);
    return jump_coefficients(MeasurementDynamics(model, meas).evaluate(psi));
}

SecondMomentDrift second_moment_drift(const LindbladModel& model, const StateVector& psi, const Measurement& meas,
                                      Unraveling tag)
{
    require_compatible(model, psi, meas);
    return second_moment_drift(MeasurementDynamics(model, meas).evaluate(psi), tag);
}

EntropyCorrection entropy_correction(const LindbladModel& model, const StateVector& psi, const Measurement& meas,
                                     Unraveling tag)
{
    require_compatible(model, psi, meas);
    const LocalQuantities q = MeasurementDynamics(model, meas).evaluate(psi);
    if (tag == Unraveling::wiener) {
        const CorrectionEvaluation c = wiener_entropy_correction(q);
        if (c.status == FunctionalStatus::boundary_divergence) {
            const auto i = static_cast<Eigen::Index>(c.divergent_outcome);
            throw BoundaryDivergence(c.divergent_outcome, q.p(i), q.centered.row(i).squaredNorm());
        }
        return EntropyCorrection{c.value, tag};
    }
    const FEvaluation f = evaluate_f(q);
    if (f.status == FunctionalStatus::boundary_divergence) {
        const auto i = static_cast<Eigen::Index>(f.divergent_outcome);
        throw BoundaryDivergence(f.divergent_outcome, q.p(i), q.sandwiched.row(i).maxCoeff());
    }
    return EntropyCorrection{-f.value, tag};
}

FFunctional f_functional(const LindbladModel& model, const StateVector& psi, const Measurement& meas)
{
    require_compatible(model, psi, meas);
    const LocalQuantities q = MeasurementDynamics(model, meas).evaluate(psi);
    const FEvaluation f = evaluate_f(q);
    if (f.status == FunctionalStatus::boundary_divergence) {
        const auto i = static_cast<Eigen::Index>(f.divergent_outcome);
        throw BoundaryDivergence(f.divergent_outcome, q.p(i), q.sandwiched.row(i).maxCoeff());
    }
    return FFunctional{f.value, f.expected_x, f.status == FunctionalStatus::all_channels_dark};
}

std::vector<double> trajectory_entropy_series(const TrajectoryRecord& record, const Measurement& meas)
{
    std::vector<double> series;
    series.reserve(record.states.size());
    for (const auto& psi : record.states) series.push_back(shannon_entropy(probabilities(psi, meas)));
    return series;
}

}  // namespace unravel

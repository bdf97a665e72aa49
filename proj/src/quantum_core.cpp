#include "unravel/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace unravel {

namespace {

void require_square(const OperatorMatrix& a, const char* what)
{
    if (a.rows() == 0 || a.rows() != a.cols()) {
        std::ostringstream msg;
        msg << what << ": expected a non-empty square matrix, got " << a.rows() << "x" << a.cols();
        throw DimensionError(msg.str());
    }
}

void require_dim(const OperatorMatrix& a, Eigen::Index dim, const char* what)
{
    if (a.rows() != dim || a.cols() != dim) {
        std::ostringstream msg;
        msg << what << ": expected " << dim << "x" << dim << ", got " << a.rows() << "x" << a.cols();
        throw DimensionError(msg.str());
    }
}

}  // namespace

std::string to_string(Unraveling tag)
{
    return tag == Unraveling::wiener ? "wiener" : "poisson";
}

Unraveling parse_unraveling(const std::string& name)
{
    if (name == "wiener") return Unraveling::wiener;
    if (name == "poisson") return Unraveling::poisson;
    throw std::invalid_argument("unknown unraveling '" + name + "' (expected wiener or poisson)");
}

double hermiticity_error(const OperatorMatrix& a)
{
    if (a.size() == 0) return 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

bool all_finite(const OperatorMatrix& a)
{
    return a.allFinite();
}

double min_eigenvalue(const OperatorMatrix& a)
{
    const OperatorMatrix herm = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double operator_norm(const OperatorMatrix& a)
{
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<OperatorMatrix> svd(a);
    return svd.singularValues()(0);
}

// --- StateVector -----------------------------------------------------------

StateVector::StateVector(ComplexVector amplitudes, double tol)
    : amplitudes_(std::move(amplitudes))
{
    if (amplitudes_.size() == 0) throw DimensionError("state vector must have positive dimension");
    if (!amplitudes_.allFinite()) throw InvariantError("state vector has non-finite amplitudes");
    const double norm2 = amplitudes_.squaredNorm();
    if (std::abs(norm2 - 1.0) > tol) {
        std::ostringstream msg;
        msg << "state vector not normalized: |psi|^2 = " << norm2;
        throw InvariantError(msg.str());
    }
}

StateVector StateVector::normalize(const ComplexVector& v)
{
    const double norm = v.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw InvariantError("cannot normalize a zero or non-finite vector");
    return StateVector(v / norm);
}

StateVector StateVector::basis(std::size_t dim, std::size_t index)
{
    if (index >= dim) throw DimensionError("basis index out of range");
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(v));
}

// --- DensityMatrix ---------------------------------------------------------

DensityMatrix::DensityMatrix(OperatorMatrix entries)
    : entries_(std::move(entries))
{
    require_square(entries_, "density matrix");
    if (!entries_.allFinite()) throw InvariantError("density matrix has non-finite entries");
    const double herm = hermiticity_error(entries_);
    if (herm > tolerance::hermitian) {
        std::ostringstream msg;
        msg << "density matrix not Hermitian (max deviation " << herm << ")";
        throw InvariantError(msg.str());
    }
    const Complex tr = entries_.trace();
    if (std::abs(tr - 1.0) > tolerance::trace) {
        std::ostringstream msg;
        msg << "density matrix trace " << tr.real() << " differs from 1";
        throw InvariantError(msg.str());
    }
    const double lowest = min_eigenvalue(entries_);
    if (lowest < -tolerance::positivity) {
        std::ostringstream msg;
        msg << "density matrix not positive semidefinite (smallest eigenvalue " << lowest << ")";
        throw InvariantError(msg.str());
    }
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim)
{
    const auto n = static_cast<Eigen::Index>(dim);
    return DensityMatrix(OperatorMatrix::Identity(n, n) / static_cast<double>(dim));
}

// --- LindbladModel ---------------------------------------------------------

LindbladModel::LindbladModel(OperatorMatrix hamiltonian, std::vector<OperatorMatrix> lindblad_ops)
    : hamiltonian_(std::move(hamiltonian)), lindblad_ops_(std::move(lindblad_ops))
{
    require_square(hamiltonian_, "hamiltonian");
    if (!hamiltonian_.allFinite()) throw InvariantError("hamiltonian has non-finite entries");
    const double herm = hermiticity_error(hamiltonian_);
    if (herm > tolerance::hermitian) {
        std::ostringstream msg;
        msg << "hamiltonian not Hermitian (max deviation " << herm << ")";
        throw InvariantError(msg.str());
    }
    const Eigen::Index n = hamiltonian_.rows();
    total_jump_product_ = OperatorMatrix::Zero(n, n);
    jump_products_.reserve(lindblad_ops_.size());
    for (const auto& op : lindblad_ops_) {
        require_dim(op, n, "lindblad operator");
        if (!op.allFinite()) throw InvariantError("lindblad operator has non-finite entries");
        jump_products_.push_back(op.adjoint() * op);
        total_jump_product_ += jump_products_.back();
        max_rate_scale_ = std::max(max_rate_scale_, std::pow(operator_norm(op), 2));
    }
}

// --- Measurement -----------------------------------------------------------

double Measurement::completeness_error(const std::vector<OperatorMatrix>& effects)
{
    if (effects.empty()) return 1.0;
    const Eigen::Index n = effects.front().rows();
    OperatorMatrix sum = OperatorMatrix::Zero(n, n);
    for (const auto& e : effects) sum += e;
    return (sum - OperatorMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

Measurement::Measurement(std::vector<OperatorMatrix> effects, std::optional<std::vector<double>> eigenvalues)
    : effects_(std::move(effects)), eigenvalues_(std::move(eigenvalues))
{
    if (effects_.empty()) throw InvariantError("measurement needs at least one effect");
    require_square(effects_.front(), "effect");
    const Eigen::Index n = effects_.front().rows();
    for (std::size_t i = 0; i < effects_.size(); ++i) {
        const auto& e = effects_[i];
        require_dim(e, n, "effect");
        if (!e.allFinite()) throw InvariantError("effect has non-finite entries");
        if (hermiticity_error(e) > tolerance::positivity) {
            throw InvariantError("effect " + std::to_string(i) + " is not Hermitian");
        }
        if (min_eigenvalue(e) < -tolerance::positivity) {
            throw InvariantError("effect " + std::to_string(i) + " is not positive semidefinite");
        }
    }
    const double dev = completeness_error(effects_);
    if (dev > tolerance::completeness) {
        std::ostringstream msg;
        msg << "effects do not sum to the identity (max deviation " << dev << ")";
        throw InvariantError(msg.str());
    }
    if (eigenvalues_ && eigenvalues_->size() != effects_.size()) {
        throw DimensionError("eigenvalue list length differs from the number of effects");
    }
}

Measurement Measurement::computational_basis(std::size_t dim)
{
    const auto n = static_cast<Eigen::Index>(dim);
    std::vector<OperatorMatrix> effects;
    for (Eigen::Index i = 0; i < n; ++i) {
        OperatorMatrix p = OperatorMatrix::Zero(n, n);
        p(i, i) = 1.0;
        effects.push_back(std::move(p));
    }
    return Measurement(std::move(effects));
}

// --- expectations ------------------------------------------------------------

Complex expectation(const StateVector& psi, const OperatorMatrix& op)
{
    const auto n = static_cast<Eigen::Index>(psi.dim());
    if (op.rows() != n || op.cols() != n) throw DimensionError("expectation: operator and state dimensions differ");
    return psi.amplitudes().dot(op * psi.amplitudes());
}

RealVector probabilities(const StateVector& psi, const Measurement& meas)
{
    if (meas.dim() != psi.dim()) throw DimensionError("probabilities: measurement and state dimensions differ");
    RealVector p(static_cast<Eigen::Index>(meas.outcomes()));
    for (std::size_t i = 0; i < meas.outcomes(); ++i) {
        p(static_cast<Eigen::Index>(i)) = std::clamp(expectation(psi, meas.effect(i)).real(), 0.0, 1.0);
    }
    return p;
}

DensityMatrix projector_of(const StateVector& psi)
{
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

double trace_distance(const OperatorMatrix& a, const OperatorMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("trace_distance: dimensions differ");
    const OperatorMatrix diff = a - b;
    const OperatorMatrix herm = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(herm, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace unravel

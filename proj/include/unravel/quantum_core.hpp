#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace unravel {

using Complex = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Operands of incompatible dimension, or an index out of range.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A value violates one of the invariants of its type (normalization,
/// Hermiticity, completeness, ...).
class InvariantError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class Unraveling { wiener, poisson };

std::string to_string(Unraveling tag);
Unraveling parse_unraveling(const std::string& name);

namespace tolerance {
inline constexpr double state_norm = 1e-10;
inline constexpr double hermitian = 1e-10;
inline constexpr double trace = 1e-8;
inline constexpr double positivity = 1e-8;
inline constexpr double completeness = 1e-8;
}  // namespace tolerance

/// Largest |a_ij - conj(a_ji)|.
double hermiticity_error(const OperatorMatrix& a);
bool all_finite(const OperatorMatrix& a);
/// Smallest eigenvalue of the Hermitian part of `a`.
double min_eigenvalue(const OperatorMatrix& a);
/// Largest singular value.
double operator_norm(const OperatorMatrix& a);

/// Normalized complex amplitude vector.
class StateVector {
public:
    /// Throws InvariantError unless | ||v||^2 - 1 | <= tol.
    explicit StateVector(ComplexVector amplitudes, double tol = tolerance::state_norm);

    /// Rescales `v` to unit norm. Throws InvariantError for a zero vector.
    static StateVector normalize(const ComplexVector& v);
    static StateVector basis(std::size_t dim, std::size_t index);

    std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
    const ComplexVector& amplitudes() const { return amplitudes_; }
    Complex operator[](std::size_t i) const { return amplitudes_(static_cast<Eigen::Index>(i)); }

    bool operator==(const StateVector& other) const { return amplitudes_ == other.amplitudes_; }

private:
    ComplexVector amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
public:
    /// Validates Hermiticity (1e-10), trace (1e-8) and positivity (-1e-8).
    explicit DensityMatrix(OperatorMatrix entries);

    static DensityMatrix maximally_mixed(std::size_t dim);

    std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
    const OperatorMatrix& matrix() const { return entries_; }
    Complex operator()(std::size_t r, std::size_t c) const
    {
        return entries_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }

private:
    OperatorMatrix entries_;
};

/// Effective Hamiltonian plus a finite list of Lindblad operators.
/// The products L_j^dagger L_j and their sum are cached at construction.
class LindbladModel {
public:
    LindbladModel(OperatorMatrix hamiltonian, std::vector<OperatorMatrix> lindblad_ops);

    std::size_t dim() const { return static_cast<std::size_t>(hamiltonian_.rows()); }
    std::size_t channels() const { return lindblad_ops_.size(); }

    const OperatorMatrix& hamiltonian() const { return hamiltonian_; }
    const std::vector<OperatorMatrix>& lindblad_ops() const { return lindblad_ops_; }
    const OperatorMatrix& lindblad_op(std::size_t j) const { return lindblad_ops_.at(j); }
    /// L_j^dagger L_j
    const OperatorMatrix& jump_product(std::size_t j) const { return jump_products_.at(j); }
    /// B = sum_j L_j^dagger L_j
    const OperatorMatrix& total_jump_product() const { return total_jump_product_; }
    /// max_j ||L_j||^2 (0 without channels)
    double max_rate_scale() const { return max_rate_scale_; }

private:
    OperatorMatrix hamiltonian_;
    std::vector<OperatorMatrix> lindblad_ops_;
    std::vector<OperatorMatrix> jump_products_;
    OperatorMatrix total_jump_product_;
    double max_rate_scale_ = 0.0;
};

/// Complete family of effects P_i = M_i^dagger M_i, optionally labelled with
/// the eigenvalues of an observable A = sum_i lambda_i P_i.
class Measurement {
public:
    explicit Measurement(std::vector<OperatorMatrix> effects,
                         std::optional<std::vector<double>> eigenvalues = std::nullopt);

    /// Projectors onto the computational basis states.
    static Measurement computational_basis(std::size_t dim);

    std::size_t dim() const { return static_cast<std::size_t>(effects_.front().rows()); }
    std::size_t outcomes() const { return effects_.size(); }
    const std::vector<OperatorMatrix>& effects() const { return effects_; }
    const OperatorMatrix& effect(std::size_t i) const { return effects_.at(i); }
    const std::optional<std::vector<double>>& eigenvalues() const { return eigenvalues_; }

    /// max entry of |sum_i P_i - I|
    static double completeness_error(const std::vector<OperatorMatrix>& effects);

private:
    std::vector<OperatorMatrix> effects_;
    std::optional<std::vector<double>> eigenvalues_;
};

/// <psi|op|psi>
Complex expectation(const StateVector& psi, const OperatorMatrix& op);

/// p_i = <P_i>, clamped to [0, 1].
RealVector probabilities(const StateVector& psi, const Measurement& meas);

/// |psi><psi|
DensityMatrix projector_of(const StateVector& psi);

/// Half the sum of absolute eigenvalues of (a - b).
double trace_distance(const OperatorMatrix& a, const OperatorMatrix& b);

}  // namespace unravel

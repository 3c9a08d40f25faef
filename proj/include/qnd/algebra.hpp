#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qnd {

using Complex = std::complex<double>;

/// Dense square complex matrix on a (truncated) Hilbert space.
///
/// Joint operators are always ordered oscillator ⊗ qubit, with the qubit
/// basis ordered (g, e). Joint index of |n, q> is therefore 2n + q.
using ComplexOperator = Eigen::MatrixXcd;

/// Largest Hilbert-space dimension any operator may reach.
inline constexpr Eigen::Index kMaxDimension = 4096;

class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the integrated state loses its meaning as a density matrix
/// (non-positive trace, large negative eigenvalues).
class IntegrationDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks squareness, dim >= 1 and that every entry is finite.
void validate_operator(const ComplexOperator& op, const char* what = "operator");

/// A conditioned quantum state. Construction checks only the operator
/// invariants; Hermiticity and unit trace are restored by enforce_hygiene().
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(ComplexOperator op);

  [[nodiscard]] const ComplexOperator& op() const noexcept { return op_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return op_.rows(); }

  /// |psi><psi| for a (not necessarily normalised) state vector.
  static DensityMatrix pure(const Eigen::VectorXcd& psi);
  static DensityMatrix basis_projector(Eigen::Index dim, Eigen::Index index);
  static DensityMatrix maximally_mixed(Eigen::Index dim);

 private:
  ComplexOperator op_;
};

ComplexOperator kron(const ComplexOperator& a, const ComplexOperator& b);
ComplexOperator dagger(const ComplexOperator& a);
ComplexOperator identity(Eigen::Index dim);
ComplexOperator commutator(const ComplexOperator& a, const ComplexOperator& b);

/// Tr[O rho].
Complex expectation(const DensityMatrix& rho, const ComplexOperator& o);

/// Tr[rho^2].
double purity(const DensityMatrix& rho);

/// rho <- (rho + rho^dagger)/2, then rho <- rho / Tr[rho].
/// Throws IntegrationDivergence when the trace is not positive.
DensityMatrix enforce_hygiene(const DensityMatrix& rho);

/// Smallest eigenvalue of the Hermitian part of rho.
double min_eigenvalue(const DensityMatrix& rho);

/// (1/2) Tr|rho - sigma|.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// max_ij |a_ij - b_ij|.
double max_abs_diff(const ComplexOperator& a, const ComplexOperator& b);

/// exp(-i H t) for Hermitian H, via its eigendecomposition.
ComplexOperator unitary_propagator(const ComplexOperator& hamiltonian, double t);

}  // namespace qnd

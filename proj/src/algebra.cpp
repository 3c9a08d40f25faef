#include "qnd/algebra.hpp"

#include <cmath>
#include <sstream>

namespace qnd {

void validate_operator(const ComplexOperator& op, const char* what) {
  if (op.rows() < 1 || op.rows() != op.cols()) {
    std::ostringstream msg;
    msg << what << ": expected a square matrix with dim >= 1, got " << op.rows() << "x"
        << op.cols();
    throw DimensionError(msg.str());
  }
  if (!op.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": contains NaN or Inf entries");
  }
}

DensityMatrix::DensityMatrix(ComplexOperator op) : op_(std::move(op)) {
  validate_operator(op_, "density matrix");
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const double norm2 = psi.squaredNorm();
  if (!(norm2 > 0.0)) {
    throw std::invalid_argument("pure state vector has zero norm");
  }
  return DensityMatrix(psi * psi.adjoint() / norm2);
}

DensityMatrix DensityMatrix::basis_projector(Eigen::Index dim, Eigen::Index index) {
  if (index < 0 || index >= dim) {
    throw DimensionError("basis index out of range");
  }
  ComplexOperator op = ComplexOperator::Zero(dim, dim);
  op(index, index) = 1.0;
  return DensityMatrix(std::move(op));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(identity(dim) / static_cast<double>(dim));
}

ComplexOperator kron(const ComplexOperator& a, const ComplexOperator& b) {
  validate_operator(a, "kron lhs");
  validate_operator(b, "kron rhs");
  const Eigen::Index na = a.rows();
  const Eigen::Index nb = b.rows();
  if (na > kMaxDimension / nb) {
    std::ostringstream msg;
    msg << "kron: dimension " << na << "*" << nb << " exceeds maximum " << kMaxDimension;
    throw DimensionError(msg.str());
  }
  ComplexOperator out(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index j = 0; j < na; ++j) {
      out.block(i * nb, j * nb, nb, nb) = a(i, j) * b;
    }
  }
  return out;
}

ComplexOperator dagger(const ComplexOperator& a) { return a.adjoint(); }

ComplexOperator identity(Eigen::Index dim) { return ComplexOperator::Identity(dim, dim); }

ComplexOperator commutator(const ComplexOperator& a, const ComplexOperator& b) {
  return a * b - b * a;
}

namespace {

void require_same_dim(const DensityMatrix& rho, const ComplexOperator& o, const char* what) {
  if (o.rows() != rho.dim() || o.cols() != rho.dim()) {
    std::ostringstream msg;
    msg << what << ": operator dim " << o.rows() << "x" << o.cols()
        << " does not match state dim " << rho.dim();
    throw DimensionError(msg.str());
  }
}

}  // namespace

Complex expectation(const DensityMatrix& rho, const ComplexOperator& o) {
  require_same_dim(rho, o, "expectation");
  // Tr[O rho] = sum_ij O_ij rho_ji
  return (o.array() * rho.op().transpose().array()).sum();
}

double purity(const DensityMatrix& rho) {
  // Tr[rho^2] = sum_ij rho_ij rho_ji, which for Hermitian rho is the squared Frobenius norm.
  return (rho.op().array() * rho.op().transpose().array()).sum().real();
}

DensityMatrix enforce_hygiene(const DensityMatrix& rho) {
  ComplexOperator h = 0.5 * (rho.op() + rho.op().adjoint());
  const double tr = h.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    std::ostringstream msg;
    msg << "density matrix trace became " << tr << "; integration diverged (reduce dt)";
    throw IntegrationDivergence(msg.str());
  }
  h /= tr;
  return DensityMatrix(std::move(h));
}

double min_eigenvalue(const DensityMatrix& rho) {
  const ComplexOperator h = 0.5 * (rho.op() + rho.op().adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexOperator> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw DimensionError("trace_distance: dimension mismatch");
  }
  const ComplexOperator diff = rho.op() - sigma.op();
  const ComplexOperator h = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexOperator> solver(h, Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double max_abs_diff(const ComplexOperator& a, const ComplexOperator& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_diff: shape mismatch");
  }
  if (a.size() == 0) {
    return 0.0;
  }
  return (a - b).cwiseAbs().maxCoeff();
}

ComplexOperator unitary_propagator(const ComplexOperator& hamiltonian, double t) {
  validate_operator(hamiltonian, "hamiltonian");
  Eigen::SelfAdjointEigenSolver<ComplexOperator> solver(hamiltonian);
  const Eigen::VectorXd& energies = solver.eigenvalues();
  Eigen::VectorXcd phases(energies.size());
  for (Eigen::Index i = 0; i < energies.size(); ++i) {
    phases(i) = std::exp(Complex(0.0, -energies(i) * t));
  }
  const ComplexOperator& v = solver.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

}  // namespace qnd

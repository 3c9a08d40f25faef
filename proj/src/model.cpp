#include "qnd/model.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace qnd {

void ModelConfig::validate() const {
  if (!(g > 0.0) || !std::isfinite(g)) {
    throw std::invalid_argument("g must be positive");
  }
  if (!(omega >= 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("omega must be non-negative");
  }
  if (n_max < 1) {
    throw std::invalid_argument("n_max must be at least 1");
  }
  if (joint_dim() > kMaxDimension) {
    throw DimensionError("n_max too large for dense storage");
  }
}

ComplexOperator annihilation(int n_max) {
  if (n_max < 1) {
    throw std::invalid_argument("annihilation: n_max must be at least 1");
  }
  ComplexOperator a = ComplexOperator::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

ComplexOperator qubit_sigma(Qubit i, Qubit j) {
  ComplexOperator s = ComplexOperator::Zero(2, 2);
  s(static_cast<int>(i), static_cast<int>(j)) = 1.0;
  return s;
}

Qubit parse_qubit(std::string_view label) {
  if (label == "g") {
    return Qubit::g;
  }
  if (label == "e") {
    return Qubit::e;
  }
  throw std::invalid_argument("invalid qubit label '" + std::string(label) + "' (expected g or e)");
}

JointOperators::JointOperators(const ModelConfig& cfg) {
  cfg.validate();
  const ComplexOperator a_osc = annihilation(cfg.n_max);
  const ComplexOperator id_osc = identity(cfg.n_max + 1);
  const ComplexOperator id_q = identity(2);
  a = kron(a_osc, id_q);
  a_dag = dagger(a);
  n_osc = a_dag * a;
  sigma_ee = kron(id_osc, qubit_sigma(Qubit::e, Qubit::e));
  total = n_osc + sigma_ee;
}

ComplexOperator build_hamiltonian(const ModelConfig& cfg) {
  cfg.validate();
  const ComplexOperator a_osc = annihilation(cfg.n_max);
  const ComplexOperator id_osc = identity(cfg.n_max + 1);
  const ComplexOperator id_q = identity(2);
  const ComplexOperator number = kron(dagger(a_osc) * a_osc, id_q);
  const ComplexOperator see = kron(id_osc, qubit_sigma(Qubit::e, Qubit::e));
  const ComplexOperator coupling = kron(dagger(a_osc), qubit_sigma(Qubit::g, Qubit::e)) +
                                   kron(a_osc, qubit_sigma(Qubit::e, Qubit::g));
  return cfg.omega * (number + see) + cfg.g * coupling;
}

ComplexOperator total_excitation(const ModelConfig& cfg) { return JointOperators(cfg).total; }

SubspaceDecomposition subspace_decomposition(const ModelConfig& cfg) {
  cfg.validate();
  const Eigen::Index dim = cfg.joint_dim();
  SubspaceDecomposition out;
  out.projectors.reserve(cfg.n_max + 1);
  out.dims.reserve(cfg.n_max + 1);
  for (int m = 0; m <= cfg.n_max; ++m) {
    ComplexOperator p = ComplexOperator::Zero(dim, dim);
    p(joint_index(m, Qubit::g), joint_index(m, Qubit::g)) = 1.0;
    if (m >= 1) {
      p(joint_index(m - 1, Qubit::e), joint_index(m - 1, Qubit::e)) = 1.0;
    }
    out.projectors.push_back(std::move(p));
    out.dims.push_back(m == 0 ? 1 : 2);
  }
  out.orphan = ComplexOperator::Zero(dim, dim);
  const Eigen::Index orphan = joint_index(cfg.n_max, Qubit::e);
  out.orphan(orphan, orphan) = 1.0;
  return out;
}

ThermalState thermal_state(double n_bar, int n_max) {
  if (!(n_bar >= 0.0) || !std::isfinite(n_bar)) {
    throw std::invalid_argument("thermal_state: n_bar must be non-negative");
  }
  if (n_max < 1) {
    throw std::invalid_argument("thermal_state: n_max must be at least 1");
  }
  const double ratio = n_bar / (1.0 + n_bar);
  Eigen::VectorXd weights(n_max + 1);
  double w = 1.0;
  for (int n = 0; n <= n_max; ++n) {
    weights(n) = w;
    w *= ratio;
  }
  weights /= weights.sum();
  ThermalState out{DensityMatrix(weights.cast<Complex>().asDiagonal().toDenseMatrix()),
                   std::pow(ratio, n_max + 1)};
  return out;
}

DensityMatrix fock_state(int n, int n_max) {
  if (n < 0 || n > n_max) {
    throw std::invalid_argument("fock_state: n outside 0..n_max");
  }
  return DensityMatrix::basis_projector(n_max + 1, n);
}

DensityMatrix initial_joint_state(const DensityMatrix& rho_osc, Qubit qubit,
                                  const ModelConfig& cfg) {
  if (rho_osc.dim() != cfg.n_max + 1) {
    std::ostringstream msg;
    msg << "initial_joint_state: oscillator state has dim " << rho_osc.dim() << ", expected "
        << cfg.n_max + 1;
    throw DimensionError(msg.str());
  }
  return DensityMatrix(kron(rho_osc.op(), qubit_sigma(qubit, qubit)));
}

}  // namespace qnd

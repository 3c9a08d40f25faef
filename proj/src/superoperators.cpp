#include <algorithm>
#include <cmath>
#include <sstream>

#include "qnd/sme.hpp"

namespace qnd {

namespace {

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) {
    throw ConfigError(field, message);
  }
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

double stiffness(const SimulationConfig& cfg) {
  return cfg.dt * std::max({cfg.k, cfg.model.g, cfg.gamma * (cfg.n_T + 1.0)});
}

}  // namespace

void SimulationConfig::validate() const {
  require(std::isfinite(model.g) && model.g > 0.0, "g", "must be positive");
  require(finite_nonneg(model.omega), "omega", "must be non-negative");
  require(model.n_max >= 1, "n_max", "must be at least 1");
  require(model.joint_dim() <= kMaxDimension, "n_max", "exceeds the dense storage limit");
  require(finite_nonneg(k), "k", "must be non-negative");
  require(std::isfinite(eta) && eta >= 0.0 && eta <= 1.0, "eta", "must lie in [0, 1]");
  require(finite_nonneg(gamma), "gamma", "must be non-negative");
  require(finite_nonneg(n_T), "n_T", "must be non-negative");
  require(std::isfinite(dt) && dt > 0.0, "dt", "must be positive");
  require(std::isfinite(t_final) && t_final > 0.0, "t_final", "must be positive");
  require(t_final >= dt, "t_final", "must cover at least one step");
  require(sample_every >= 1, "sample_every", "must be at least 1");
  require(finite_nonneg(n_bar), "n_bar", "must be non-negative");
  require(!fock_n || (*fock_n >= 0 && *fock_n <= model.n_max), "fock_n",
          "must lie in 0..n_max");
  require(std::isfinite(orphan_limit) && orphan_limit > 0.0, "orphan_limit",
          "must be positive");
  require(n_trajectories >= 1, "n_trajectories", "must be at least 1");
  for (double kv : k_values) {
    require(std::isfinite(kv) && kv > 0.0, "k_values", "entries must be positive");
  }
  for (const auto& jump : jump_schedule) {
    require(std::isfinite(jump.time) && jump.time >= 0.0 && jump.time <= t_final,
            "jump_schedule", "jump times must lie in [0, t_final]");
  }
  const double s = stiffness(*this);
  if (s > 1e-2 * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt*max(k, g, gamma(n_T+1)) = " << s << " exceeds the stability limit 1e-2";
    throw ConfigError("dt", msg.str());
  }
}

std::vector<std::string> SimulationConfig::warnings() const {
  std::vector<std::string> out;
  const double s = stiffness(*this);
  if (s > 1e-3) {
    std::ostringstream msg;
    msg << "dt*max(k, g, gamma(n_T+1)) = " << s << " is above 1e-3; consider a smaller dt";
    out.push_back(msg.str());
  }
  if (scheme == Scheme::euler) {
    out.emplace_back("euler scheme: positivity is not preserved; expect aborts for pure states");
  }
  return out;
}

long SimulationConfig::n_steps() const { return std::lround(t_final / dt); }

int default_sample_every(double dt) {
  return std::max(1, static_cast<int>(std::lround(kDefaultSampleInterval / dt)));
}

double default_dt(double k, double g) { return k <= g ? 1e-3 / g : 1e-4 / g; }

InitialState make_initial_state(const SimulationConfig& cfg) {
  cfg.model.validate();
  if (cfg.fock_n) {
    return {initial_joint_state(fock_state(*cfg.fock_n, cfg.model.n_max), cfg.qubit, cfg.model),
            0.0};
  }
  ThermalState thermal = thermal_state(cfg.n_bar, cfg.model.n_max);
  return {initial_joint_state(thermal.rho, cfg.qubit, cfg.model), thermal.leakage};
}

ComplexOperator dissipator(const ComplexOperator& o, const DensityMatrix& rho) {
  if (o.rows() != rho.dim() || o.cols() != rho.dim()) {
    throw DimensionError("dissipator: operator/state dimension mismatch");
  }
  const ComplexOperator& r = rho.op();
  const ComplexOperator od = o.adjoint();
  const ComplexOperator odo = od * o;
  return 2.0 * o * r * od - odo * r - r * odo;
}

ComplexOperator info_gain(const ComplexOperator& o, const DensityMatrix& rho) {
  if (o.rows() != rho.dim() || o.cols() != rho.dim()) {
    throw DimensionError("info_gain: operator/state dimension mismatch");
  }
  const ComplexOperator& r = rho.op();
  const ComplexOperator od = o.adjoint();
  const Complex mean = expectation(rho, o) + expectation(rho, od);
  return o * r + r * od - mean * r;
}

SmeOperators::SmeOperators(const SimulationConfig& config)
    : cfg(config), joint(config.model) {
  hamiltonian = build_hamiltonian(cfg.model);
  propagator = unitary_propagator(hamiltonian, cfg.dt);
  measured = joint.sigma_ee;
  bath_loss = std::sqrt(cfg.gamma * (cfg.n_T + 1.0)) * joint.a;
  bath_gain = std::sqrt(cfg.gamma * cfg.n_T) * joint.a_dag;
  bath_rate = bath_loss.adjoint() * bath_loss + bath_gain.adjoint() * bath_gain;
}

ComplexOperator drift(const DensityMatrix& rho, const SmeOperators& ops, bool include_bath) {
  const ComplexOperator& r = rho.op();
  const Complex minus_i(0.0, -1.0);
  ComplexOperator out = minus_i * commutator(ops.hamiltonian, r);
  out += ops.cfg.k * dissipator(ops.measured, rho);
  if (include_bath && ops.cfg.gamma > 0.0) {
    // 0.5 * D[sqrt(rate) L] matches (gamma/2)(n_T+1) D[a] + (gamma/2) n_T D[a†].
    out += 0.5 * dissipator(ops.bath_loss, rho);
    out += 0.5 * dissipator(ops.bath_gain, rho);
  }
  return out;
}

ComplexOperator drift(const DensityMatrix& rho, const SimulationConfig& cfg) {
  return drift(rho, SmeOperators(cfg));
}

DensityMatrix step(const DensityMatrix& rho, double dW, const SmeOperators& ops,
                   bool include_bath) {
  const SimulationConfig& cfg = ops.cfg;
  ComplexOperator next = rho.op() + drift(rho, ops, include_bath) * cfg.dt;
  if (cfg.k > 0.0 && dW != 0.0) {
    next += std::sqrt(2.0 * cfg.k) * cfg.eta * info_gain(ops.measured, rho) * dW;
  }
  return enforce_hygiene(DensityMatrix(std::move(next)));
}

DensityMatrix step(const DensityMatrix& rho, double dW, const SimulationConfig& cfg) {
  return step(rho, dW, SmeOperators(cfg));
}

double excited_population(const DensityMatrix& rho) {
  double sum = 0.0;
  for (Eigen::Index i = 1; i < rho.dim(); i += 2) {
    sum += rho.op()(i, i).real();
  }
  return sum;
}

double synthesize_record(double sigma_ee, double dW, double k, double dt) {
  if (!(k > 0.0)) {
    throw std::domain_error("measurement record is undefined for k = 0");
  }
  return sigma_ee * dt + dW / std::sqrt(8.0 * k);
}

double synthesize_record(const DensityMatrix& rho, double dW, const SimulationConfig& cfg) {
  return synthesize_record(excited_population(rho), dW, cfg.k, cfg.dt);
}

double extract_innovation(double dY, double sigma_ee_est, double k, double dt) {
  return std::sqrt(8.0 * k) * (dY - sigma_ee_est * dt);
}

double extract_innovation(double dY, const DensityMatrix& rho_est, const SimulationConfig& cfg) {
  return extract_innovation(dY, excited_population(rho_est), cfg.k, cfg.dt);
}

DensityMatrix apply_jump(const DensityMatrix& rho, JumpDirection direction) {
  if (rho.dim() < 4 || rho.dim() % 2 != 0) {
    throw DimensionError("apply_jump: state is not an oscillator ⊗ qubit state");
  }
  ModelConfig model;
  model.n_max = static_cast<int>(rho.dim() / 2 - 1);
  const JointOperators joint(model);
  const ComplexOperator& j = direction == JumpDirection::up ? joint.a_dag : joint.a;
  ComplexOperator out = j * rho.op() * j.adjoint();
  const double weight = out.trace().real();
  if (!(weight > 1e-300)) {
    throw std::domain_error("apply_jump: zero norm after jump");
  }
  return enforce_hygiene(DensityMatrix(out / weight));
}

}  // namespace qnd

#include "qnd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qnd/ensemble.hpp"
#include "qnd/noise.hpp"

namespace qnd {

// ---------------------------------------------------------------------------
// Aggregation

void EnsembleAccumulator::Welford::init(std::size_t n) {
  mean.assign(n, 0.0);
  m2.assign(n, 0.0);
}

void EnsembleAccumulator::Welford::push(std::size_t i, double x, int count) {
  const double delta = x - mean[i];
  mean[i] += delta / count;
  m2[i] += delta * (x - mean[i]);
}

SeriesStats EnsembleAccumulator::Welford::stats(int count) const {
  SeriesStats out;
  out.mean = mean;
  out.std.resize(m2.size());
  for (std::size_t i = 0; i < m2.size(); ++i) {
    out.std[i] = count > 1 ? std::sqrt(std::max(0.0, m2[i] / (count - 1))) : 0.0;
  }
  return out;
}

void EnsembleAccumulator::add(const TrajectoryRecord& record) {
  const std::size_t n = record.size();
  if (count_ == 0) {
    times_ = record.times;
    dY_.init(n);
    sigma_ee_.init(n);
    purity_.init(n);
    mean_n_.init(n);
    leakage_.init(n);
    p_m_.assign(n > 0 ? record.p_m.front().size() : 0, Welford{});
    for (auto& w : p_m_) {
      w.init(n);
    }
  } else {
    if (record.times.size() != times_.size()) {
      throw std::invalid_argument("aggregate: records have different numbers of samples");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(record.times[i] - times_[i]) > 1e-9 * std::max(1.0, std::abs(times_[i]))) {
        throw std::invalid_argument("aggregate: records do not share a time grid");
      }
    }
  }
  ++count_;
  seeds_.push_back(record.seed);
  for (std::size_t i = 0; i < n; ++i) {
    dY_.push(i, record.dY[i], count_);
    sigma_ee_.push(i, record.sigma_ee[i], count_);
    purity_.push(i, record.purity[i], count_);
    mean_n_.push(i, record.mean_n[i], count_);
    leakage_.push(i, record.leakage[i], count_);
    if (record.p_m[i].size() != p_m_.size()) {
      throw std::invalid_argument("aggregate: records use different truncations");
    }
    for (std::size_t m = 0; m < p_m_.size(); ++m) {
      p_m_[m].push(i, record.p_m[i][m], count_);
    }
  }
}

EnsembleSummary EnsembleAccumulator::summary() const {
  if (count_ == 0) {
    throw std::invalid_argument("aggregate: no trajectories");
  }
  EnsembleSummary out;
  out.times = times_;
  out.dY = dY_.stats(count_);
  out.sigma_ee = sigma_ee_.stats(count_);
  out.purity = purity_.stats(count_);
  out.mean_n = mean_n_.stats(count_);
  out.leakage = leakage_.stats(count_);
  for (const auto& w : p_m_) {
    out.p_m.push_back(w.stats(count_));
  }
  out.n_trajectories = count_;
  out.seeds = seeds_;
  return out;
}

EnsembleSummary aggregate(std::span<const TrajectoryRecord> records) {
  EnsembleAccumulator acc;
  for (const auto& r : records) {
    acc.add(r);
  }
  return acc.summary();
}

// ---------------------------------------------------------------------------
// Purity fit

PurityFit fit_purity(std::span<const double> times, std::span<const double> purity) {
  if (times.size() != purity.size()) {
    throw std::invalid_argument("fit_purity: times and purity differ in length");
  }
  if (times.size() < 10) {
    throw FitError("fit_purity: need at least 10 time points");
  }
  const double p0 = purity[0];
  if (!(p0 < 1.0 - kSaturationFloor)) {
    throw FitError("fit_purity: initial purity is already saturated");
  }
  const double y0 = std::log(1.0 - p0);
  const double t0 = times[0];
  double num = 0.0;
  double den = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double gap = 1.0 - purity[i];
    if (gap <= kSaturationFloor) {
      continue;
    }
    ++used;
    const double t = times[i] - t0;
    num += t * (y0 - std::log(gap));
    den += t * t;
  }
  if (used < 2 || !(den > 0.0)) {
    throw FitError("fit_purity: all points saturated (1 - P <= 1e-3); fit is degenerate");
  }
  const double rate = num / den;
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw FitError("fit_purity: purity does not approach 1; tau is not finite");
  }
  PurityFit fit;
  fit.p0 = p0;
  fit.tau = 1.0 / rate;
  fit.n_points_used = used;
  double sq = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double model = 1.0 - (1.0 - p0) * std::exp(-(times[i] - t0) * rate);
    sq += (purity[i] - model) * (purity[i] - model);
  }
  fit.residual = std::sqrt(sq / static_cast<double>(times.size()));
  return fit;
}

PurityFit fit_purity(const EnsembleSummary& summary) {
  return fit_purity(summary.times, summary.purity.mean);
}

// ---------------------------------------------------------------------------
// Sweeps

SimulationConfig config_for_k(const SimulationConfig& base, double k) {
  SimulationConfig cfg = base;
  cfg.k = k;
  const double target = std::min(base.dt, default_dt(k, base.model.g));
  if (target < base.dt) {
    const double interval = base.sample_dt();
    cfg.dt = target;
    cfg.sample_every = std::max(1, static_cast<int>(std::lround(interval / target)));
  }
  return cfg;
}

std::vector<SweepEntry> sweep_tau(std::span<const double> k_values, const SimulationConfig& base,
                                  int n_traj, int workers) {
  if (n_traj < 1) {
    throw std::invalid_argument("sweep_tau: need at least one trajectory per k");
  }
  std::vector<SweepEntry> out;
  for (double k : k_values) {
    SweepEntry entry;
    entry.k = k;
    entry.n_trajectories = n_traj;
    try {
      if (!(k > 0.0)) {
        throw std::invalid_argument("k must be positive");
      }
      const SimulationConfig cfg = config_for_k(base, k);
      EnsembleAccumulator acc;
      run_ensemble(
          cfg, static_cast<std::size_t>(n_traj),
          [&](std::size_t, GeneratorResult&& r) { acc.add(r.record); }, workers);
      entry.summary = acc.summary();
      entry.seeds = entry.summary.seeds;
      entry.fit = fit_purity(entry.summary);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Collapse and jump metrics

namespace {

std::pair<int, double> leading_subspace(const std::vector<double>& p) {
  const auto it = std::max_element(p.begin(), p.end());
  return {static_cast<int>(it - p.begin()), *it};
}

constexpr double kTimeSlack = 1e-9;

}  // namespace

std::optional<Collapse> collapse_metrics(const TrajectoryRecord& record, double threshold,
                                         double dwell) {
  if (!(threshold > 0.5 && threshold < 1.0)) {
    throw std::invalid_argument("collapse_metrics: threshold must lie in (0.5, 1)");
  }
  const std::size_t n = record.size();
  if (n == 0) {
    return std::nullopt;
  }
  const double t_end = record.times.back();
  for (std::size_t i = 0; i < n; ++i) {
    const auto [m, p] = leading_subspace(record.p_m[i]);
    if (p < threshold) {
      continue;
    }
    const double t = record.times[i];
    if (t + dwell > t_end + kTimeSlack) {
      break;
    }
    bool held = true;
    for (std::size_t j = i + 1; j < n && record.times[j] <= t + dwell + kTimeSlack; ++j) {
      if (record.p_m[j][m] < threshold) {
        held = false;
        break;
      }
    }
    if (held) {
      return Collapse{t, m};
    }
  }
  return std::nullopt;
}

std::optional<double> jump_detection(std::span<const double> times,
                                     std::span<const double> values, const StepFunction& truth,
                                     double band, double dwell) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("jump_detection: times and values differ in length");
  }
  const std::size_t n = times.size();
  if (n == 0) {
    return std::nullopt;
  }
  const double t_end = times.back();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = times[i];
    if (t < truth.t_jump - kTimeSlack) {
      continue;
    }
    if (t + dwell > t_end + kTimeSlack) {
      break;
    }
    bool held = true;
    for (std::size_t j = i; j < n && times[j] <= t + dwell + kTimeSlack; ++j) {
      if (!(std::abs(values[j] - truth.after) < band)) {
        held = false;
        break;
      }
    }
    if (held) {
      return std::max(0.0, t - truth.t_jump);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Reduced-dynamics oracle

double ReducedDynamicsResult::sup_difference() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < full_p.size(); ++i) {
    for (std::size_t m = 0; m < full_p[i].size(); ++m) {
      worst = std::max(worst, std::abs(full_p[i][m] - reduced_p[i][m]));
    }
  }
  return worst;
}

ReducedDynamicsResult reduced_dynamics_oracle(std::span<const AnsatzComponent> components,
                                              const SimulationConfig& cfg,
                                              std::span<const double> noise) {
  cfg.validate();
  if (cfg.gamma != 0.0 || !cfg.jump_schedule.empty()) {
    throw std::invalid_argument("reduced_dynamics_oracle: requires gamma = 0 and no jumps");
  }
  if (cfg.model.n_max > 3) {
    throw std::invalid_argument("reduced_dynamics_oracle: requires n_max <= 3");
  }
  if (components.empty()) {
    throw std::invalid_argument("reduced_dynamics_oracle: no components");
  }
  const int n_max = cfg.model.n_max;
  const Eigen::Index dim = cfg.model.joint_dim();
  const SubspaceDecomposition subspaces = subspace_decomposition(cfg.model);

  std::vector<double> p(static_cast<std::size_t>(n_max) + 1, 0.0);
  std::vector<Eigen::VectorXcd> psi(static_cast<std::size_t>(n_max) + 1);
  double total = 0.0;
  for (const auto& c : components) {
    if (c.m < 0 || c.m > n_max) {
      throw std::invalid_argument("reduced_dynamics_oracle: subspace index out of range");
    }
    if (c.psi.size() != dim) {
      throw DimensionError("reduced_dynamics_oracle: component vector has the wrong dimension");
    }
    if (p[c.m] != 0.0 || !(c.weight > 0.0)) {
      throw std::invalid_argument("reduced_dynamics_oracle: weights must be positive, one per m");
    }
    const Eigen::VectorXcd unit = c.psi / c.psi.norm();
    const double outside = (unit - subspaces.projectors[c.m] * unit).norm();
    if (outside > 1e-12) {
      throw std::invalid_argument(
          "reduced_dynamics_oracle: ansatz violated (component leaves its subspace)");
    }
    p[c.m] = c.weight;
    psi[c.m] = unit;
    total += c.weight;
  }
  ComplexOperator rho0 = ComplexOperator::Zero(dim, dim);
  for (int m = 0; m <= n_max; ++m) {
    p[m] /= total;
    if (p[m] > 0.0) {
      rho0 += p[m] * psi[m] * psi[m].adjoint();
    }
  }

  const long n_steps = cfg.n_steps();
  std::vector<double> path(noise.begin(), noise.end());
  if (path.empty()) {
    const NoiseStream stream(cfg.seed, kMeasurementStream);
    path.resize(static_cast<std::size_t>(n_steps));
    for (long i = 0; i < n_steps; ++i) {
      path[i] = stream.gaussian(static_cast<std::uint64_t>(i)) * std::sqrt(cfg.dt);
    }
  }
  if (static_cast<long>(path.size()) != n_steps) {
    throw std::invalid_argument("reduced_dynamics_oracle: noise path length mismatch");
  }

  RunOptions options;
  options.backend = Backend::dense;
  options.initial_state = DensityMatrix(rho0);
  options.noise = path;
  const GeneratorResult full = run_generator(cfg, options);

  ReducedDynamicsResult out;
  out.times = full.record.times;
  out.full_p = full.record.p_m;
  out.reduced_p.push_back(p);

  const JointOperators joint(cfg.model);
  const ComplexOperator u = unitary_propagator(build_hamiltonian(cfg.model), cfg.dt);
  const ComplexOperator& b_op = joint.sigma_ee;
  const double c_scale = std::sqrt(2.0 * cfg.k);
  const double sqrt8k = std::sqrt(8.0 * cfg.k);
  std::vector<double> b_m(p.size(), 0.0);
  for (long i = 0; i < n_steps; ++i) {
    const double dW = path[static_cast<std::size_t>(i)];
    double b = 0.0;
    for (int m = 0; m <= n_max; ++m) {
      if (p[m] > 0.0) {
        b_m[m] = psi[m].dot(b_op * psi[m]).real();
        b += p[m] * b_m[m];
      }
    }
    for (int m = 0; m <= n_max; ++m) {
      if (p[m] <= 0.0) {
        continue;
      }
      p[m] += sqrt8k * p[m] * (b_m[m] - b) * dW;
      // Normalised stochastic Schrödinger equation within the subspace, driven
      // by the innovation relative to this component's own prediction.
      const double dW_m = dW + sqrt8k * (b - b_m[m]) * cfg.dt;
      Eigen::VectorXcd next = u * psi[m];
      const double cm = c_scale * b_m[m];
      const Eigen::VectorXcd shifted = c_scale * (b_op * next) - cm * next;
      const Eigen::VectorXcd shifted2 = c_scale * (b_op * shifted) - cm * shifted;
      next += -0.5 * cfg.dt * shifted2 + dW_m * shifted;
      psi[m] = next / next.norm();
    }
    if ((i + 1) % cfg.sample_every == 0) {
      out.reduced_p.push_back(p);
    }
  }
  return out;
}

}  // namespace qnd

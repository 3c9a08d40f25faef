#include <algorithm>
#include <cmath>
#include <sstream>

#include "qnd/config_io.hpp"
#include "qnd/kernels.hpp"
#include "qnd/noise.hpp"
#include "qnd/sme.hpp"

namespace qnd {

double TrajectoryRecord::mean_excitation(std::size_t i) const {
  const auto& p = p_m[i];
  double sum = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m) {
    sum += static_cast<double>(m) * p[m];
  }
  return sum + static_cast<double>(p.size()) * leakage[i];
}

namespace {

inline constexpr double kPositivityFloor = -1e-6;

class Recorder {
 public:
  Recorder(const SimulationConfig& cfg, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(cfg.n_samples());
    rec_.times.reserve(n);
    rec_.dY.reserve(n);
    rec_.sigma_ee.reserve(n);
    rec_.p_m.reserve(n);
    rec_.purity.reserve(n);
    rec_.mean_n.reserve(n);
    rec_.leakage.reserve(n);
    rec_.seed = seed;
    rec_.config_hash = config_hash(cfg);
  }

  void add(double t, double dY_bin, Observables obs) {
    rec_.times.push_back(t);
    rec_.dY.push_back(dY_bin);
    rec_.sigma_ee.push_back(obs.sigma_ee);
    rec_.purity.push_back(obs.purity);
    rec_.mean_n.push_back(obs.mean_n);
    rec_.leakage.push_back(obs.leakage);
    rec_.p_m.push_back(std::move(obs.p_m));
  }

  TrajectoryRecord take() { return std::move(rec_); }

 private:
  TrajectoryRecord rec_;
};

template <class Kernel>
Observables observe_checked(const Kernel& kernel, const typename Kernel::State& state,
                            const SimulationConfig& cfg, double t) {
  Observables obs = kernel.observe(state);
  const double lowest = kernel.min_eigenvalue(state);
  if (lowest < kPositivityFloor) {
    std::ostringstream msg;
    msg << "state lost positivity at t=" << t << " (min eigenvalue " << lowest
        << "); reduce dt (currently " << cfg.dt << ")";
    throw IntegrationDivergence(msg.str());
  }
  if (obs.leakage > cfg.orphan_limit) {
    std::ostringstream msg;
    msg << "population " << obs.leakage << " of the truncation orphan |n_max,e> at t=" << t
        << " exceeds " << cfg.orphan_limit << "; increase n_max";
    throw TruncationError(msg.str());
  }
  return obs;
}

bool choose_block(const DensityMatrix& initial, const SimulationConfig& cfg,
                  const RunOptions& options) {
  switch (options.backend) {
    case Backend::dense:
      return false;
    case Backend::block:
      if (cfg.scheme != Scheme::kraus) {
        throw std::invalid_argument("block backend requires the kraus scheme");
      }
      return true;
    case Backend::automatic:
      break;
  }
  return cfg.scheme == Scheme::kraus && is_block_diagonal(initial);
}

DensityMatrix initial_for(const SimulationConfig& cfg, const RunOptions& options) {
  if (options.initial_state) {
    if (options.initial_state->dim() != cfg.model.joint_dim()) {
      throw DimensionError("initial state dimension does not match n_max");
    }
    return *options.initial_state;
  }
  return make_initial_state(cfg).rho;
}

template <class Kernel>
typename Kernel::State to_state(const DensityMatrix& rho);

template <>
DensityMatrix to_state<DenseKernel>(const DensityMatrix& rho) {
  return rho;
}

template <>
BlockState to_state<BlockKernel>(const DensityMatrix& rho) {
  return BlockState::from_dense(rho);
}

struct ScheduledJump {
  long step;
  JumpDirection direction;
};

template <class Kernel>
GeneratorResult generate(const SimulationConfig& cfg, const RunOptions& options,
                         const DensityMatrix& initial) {
  const SmeOperators ops(cfg);
  BathMode bath = BathMode::averaged;
  if (!cfg.jump_schedule.empty()) {
    bath = BathMode::none;
  } else if (cfg.bath == BathRealization::markov) {
    bath = BathMode::no_jump;
  }
  const Kernel kernel(ops, bath);
  auto state = to_state<Kernel>(initial);

  const long n_steps = cfg.n_steps();
  const int every = cfg.sample_every;
  const double dt = cfg.dt;
  const double sqrt_dt = std::sqrt(dt);
  if (!options.noise.empty() && static_cast<long>(options.noise.size()) != n_steps) {
    throw std::invalid_argument("supplied noise path length does not match the step count");
  }

  std::vector<ScheduledJump> schedule;
  for (const auto& j : cfg.jump_schedule) {
    schedule.push_back({std::lround(j.time / dt), j.direction});
  }
  std::stable_sort(schedule.begin(), schedule.end(),
                   [](const auto& a, const auto& b) { return a.step < b.step; });
  std::size_t next_jump = 0;

  const NoiseStream measurement(cfg.seed, kMeasurementStream);
  const NoiseStream bath_noise(cfg.seed, kBathStream);
  const bool markov = bath == BathMode::no_jump && cfg.gamma > 0.0;
  const double up_rate = cfg.gamma * cfg.n_T;
  const double down_rate = cfg.gamma * (cfg.n_T + 1.0);

  GeneratorResult out;
  Recorder recorder(cfg, cfg.seed);
  recorder.add(0.0, 0.0, observe_checked(kernel, state, cfg, 0.0));
  if (options.keep_states) {
    out.states.push_back(kernel.to_dense(state));
  }
  if (options.keep_measurement) {
    out.measurement.dt = dt;
    out.measurement.dY.reserve(static_cast<std::size_t>(n_steps));
  }
  if (options.keep_noise) {
    out.noise.reserve(static_cast<std::size_t>(n_steps));
  }

  double bin = 0.0;
  for (long i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    while (next_jump < schedule.size() && schedule[next_jump].step == i) {
      kernel.jump(state, schedule[next_jump].direction);
      out.jumps.push_back({t, schedule[next_jump].direction});
      ++next_jump;
    }
    if (markov) {
      const double p_up = up_rate * kernel.jump_weight(state, JumpDirection::up) * dt;
      const double p_down = down_rate * kernel.jump_weight(state, JumpDirection::down) * dt;
      const double u = bath_noise.uniform(static_cast<std::uint64_t>(i));
      if (u < p_up) {
        kernel.jump(state, JumpDirection::up);
        out.jumps.push_back({t, JumpDirection::up});
      } else if (u < p_up + p_down) {
        kernel.jump(state, JumpDirection::down);
        out.jumps.push_back({t, JumpDirection::down});
      }
    }
    const double b = kernel.sigma_ee(state);
    const double dW = options.noise.empty()
                          ? measurement.gaussian(static_cast<std::uint64_t>(i)) * sqrt_dt
                          : options.noise[static_cast<std::size_t>(i)];
    const double dY = synthesize_record(b, dW, cfg.k, dt);
    kernel.conditioned_step(state, dW);
    bin += dY;
    if (options.keep_measurement) {
      out.measurement.dY.push_back(dY);
    }
    if (options.keep_noise) {
      out.noise.push_back(dW);
    }
    if ((i + 1) % every == 0) {
      const double ts = static_cast<double>(i + 1) * dt;
      recorder.add(ts, bin, observe_checked(kernel, state, cfg, ts));
      bin = 0.0;
      if (options.keep_states) {
        out.states.push_back(kernel.to_dense(state));
      }
    }
  }
  out.record = recorder.take();
  out.final_state = kernel.to_dense(state);
  return out;
}

template <class Kernel>
FilterResult filter(const MeasurementRecord& record, const SimulationConfig& cfg,
                    const RunOptions& options, const DensityMatrix& initial) {
  const SmeOperators ops(cfg);
  const Kernel kernel(ops, BathMode::averaged);
  auto state = to_state<Kernel>(initial);
  const double dt = cfg.dt;
  const int every = cfg.sample_every;
  const long n_steps = static_cast<long>(record.dY.size());

  FilterResult out;
  Recorder recorder(cfg, cfg.seed);
  recorder.add(0.0, 0.0, observe_checked(kernel, state, cfg, 0.0));
  if (options.keep_states) {
    out.states.push_back(kernel.to_dense(state));
  }
  double bin = 0.0;
  for (long i = 0; i < n_steps; ++i) {
    const double dY = record.dY[static_cast<std::size_t>(i)];
    const double dW = extract_innovation(dY, kernel.sigma_ee(state), cfg.k, dt);
    kernel.conditioned_step(state, dW);
    bin += dY;
    if (options.keep_noise) {
      out.innovations.push_back(dW);
    }
    if ((i + 1) % every == 0) {
      const double ts = static_cast<double>(i + 1) * dt;
      recorder.add(ts, bin, observe_checked(kernel, state, cfg, ts));
      bin = 0.0;
      if (options.keep_states) {
        out.states.push_back(kernel.to_dense(state));
      }
    }
  }
  out.record = recorder.take();
  out.final_state = kernel.to_dense(state);
  return out;
}

template <class Kernel>
GeneratorResult unconditional(const SimulationConfig& cfg, const RunOptions& options,
                              const DensityMatrix& initial) {
  const SmeOperators ops(cfg);
  const Kernel kernel(ops, BathMode::averaged);
  auto state = to_state<Kernel>(initial);
  const long n_steps = cfg.n_steps();
  const double dt = cfg.dt;

  GeneratorResult out;
  Recorder recorder(cfg, cfg.seed);
  recorder.add(0.0, 0.0, observe_checked(kernel, state, cfg, 0.0));
  if (options.keep_states) {
    out.states.push_back(kernel.to_dense(state));
  }
  double bin = 0.0;
  for (long i = 0; i < n_steps; ++i) {
    bin += kernel.sigma_ee(state) * dt;
    kernel.unconditioned_step(state);
    if ((i + 1) % cfg.sample_every == 0) {
      const double ts = static_cast<double>(i + 1) * dt;
      recorder.add(ts, bin, observe_checked(kernel, state, cfg, ts));
      bin = 0.0;
      if (options.keep_states) {
        out.states.push_back(kernel.to_dense(state));
      }
    }
  }
  out.record = recorder.take();
  out.final_state = kernel.to_dense(state);
  return out;
}

}  // namespace

GeneratorResult run_generator(const SimulationConfig& cfg, const RunOptions& options) {
  cfg.validate();
  if (!(cfg.k > 0.0)) {
    throw std::domain_error("run_generator: measurement record is undefined for k = 0");
  }
  const DensityMatrix initial = initial_for(cfg, options);
  if (choose_block(initial, cfg, options)) {
    return generate<BlockKernel>(cfg, options, initial);
  }
  return generate<DenseKernel>(cfg, options, initial);
}

FilterResult run_filter(const MeasurementRecord& record, const SimulationConfig& cfg,
                        const RunOptions& options) {
  cfg.validate();
  if (!(cfg.k > 0.0)) {
    throw std::domain_error("run_filter: innovations are undefined for k = 0");
  }
  if (!(record.dt > 0.0)) {
    throw std::invalid_argument("run_filter: record has no time step");
  }
  // The filter steps at the record's resolution; its sampling grid must match
  // the configured one.
  const double ratio = cfg.sample_dt() / record.dt;
  const long every = std::lround(ratio);
  if (every < 1 || std::abs(ratio - static_cast<double>(every)) > 1e-9 * ratio) {
    std::ostringstream msg;
    msg << "run_filter: record step " << record.dt << " does not divide the sampling interval "
        << cfg.sample_dt();
    throw std::invalid_argument(msg.str());
  }
  SimulationConfig fcfg = cfg;
  fcfg.dt = record.dt;
  fcfg.sample_every = static_cast<int>(every);
  const long expected = fcfg.n_steps();
  if (static_cast<long>(record.dY.size()) != expected) {
    std::ostringstream msg;
    msg << "run_filter: record has " << record.dY.size() << " increments, expected " << expected;
    throw std::invalid_argument(msg.str());
  }
  const DensityMatrix initial = initial_for(fcfg, options);
  if (choose_block(initial, fcfg, options)) {
    return filter<BlockKernel>(record, fcfg, options, initial);
  }
  return filter<DenseKernel>(record, fcfg, options, initial);
}

GeneratorResult run_unconditional(const SimulationConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const DensityMatrix initial = initial_for(cfg, options);
  if (choose_block(initial, cfg, options)) {
    return unconditional<BlockKernel>(cfg, options, initial);
  }
  return unconditional<DenseKernel>(cfg, options, initial);
}

}  // namespace qnd

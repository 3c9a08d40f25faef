#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnd/algebra.hpp"
#include "qnd/model.hpp"

namespace qnd {

enum class JumpDirection { up, down };

struct JumpEvent {
  double time = 0.0;
  JumpDirection direction = JumpDirection::up;

  friend bool operator==(const JumpEvent&, const JumpEvent&) = default;
};

/// How the thermal bath enters the true (generator) dynamics when no jump
/// schedule is given. The filter always uses the averaged form.
enum class BathRealization {
  averaged,  ///< bath dissipators in the master equation
  markov,    ///< discrete up/down jumps sampled from the state-dependent rates
};

enum class Scheme {
  kraus,  ///< exact unitary step followed by a normalised Kraus update (default)
  euler,  ///< literal Euler-Maruyama increment plus hygiene (dense backend only)
};

/// Raised for invalid configuration values; field() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Raised when the truncation orphan |n_max,e> collects more weight than allowed.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulationConfig {
  ModelConfig model;
  double k = 0.1;      ///< measurement strength
  double eta = 1.0;    ///< detection efficiency
  double gamma = 0.0;  ///< bath coupling rate
  double n_T = 0.0;    ///< bath mean excitation
  double dt = 1e-3;
  double t_final = 50.0;
  int sample_every = 50;
  std::uint64_t seed = 0;
  std::vector<JumpEvent> jump_schedule;

  // Initial state: thermal(n_bar) unless fock_n is set, times |qubit>.
  double n_bar = 3.0;
  std::optional<int> fock_n;
  Qubit qubit = Qubit::e;

  BathRealization bath = BathRealization::averaged;
  Scheme scheme = Scheme::kraus;
  double orphan_limit = 1e-3;

  // Ensemble and sweep settings.
  int n_trajectories = 200;
  std::vector<double> k_values{0.1, 0.3, 1.0, 3.0, 10.0};

  /// Throws ConfigError naming the first violated field.
  void validate() const;
  /// Soft diagnostics (e.g. step size close to the stability limit).
  [[nodiscard]] std::vector<std::string> warnings() const;

  [[nodiscard]] long n_steps() const;
  [[nodiscard]] long n_samples() const { return n_steps() / sample_every + 1; }
  [[nodiscard]] double sample_dt() const { return dt * sample_every; }

  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

/// Sampling interval used when sample_every is not given explicitly.
inline constexpr double kDefaultSampleInterval = 0.05;
int default_sample_every(double dt);
/// 1e-3/g for k <= g, 1e-4/g above.
double default_dt(double k, double g);

struct InitialState {
  DensityMatrix rho;
  double truncation_leakage = 0.0;
};
InitialState make_initial_state(const SimulationConfig& cfg);

// ---------------------------------------------------------------------------
// Superoperators (dense).

/// D[O]rho = 2 O rho O† - O†O rho - rho O†O.
ComplexOperator dissipator(const ComplexOperator& o, const DensityMatrix& rho);

/// H[O]rho = O rho + rho O† - <O + O†>_rho rho.
ComplexOperator info_gain(const ComplexOperator& o, const DensityMatrix& rho);

/// Precomputed joint-space operators for one configuration.
struct SmeOperators {
  explicit SmeOperators(const SimulationConfig& cfg);

  SimulationConfig cfg;
  JointOperators joint;
  ComplexOperator hamiltonian;
  ComplexOperator propagator;   ///< exp(-i H dt)
  ComplexOperator measured;     ///< sigma_ee on the joint space
  ComplexOperator bath_loss;    ///< sqrt(gamma (n_T+1)) a
  ComplexOperator bath_gain;    ///< sqrt(gamma n_T) a†
  ComplexOperator bath_rate;    ///< gamma (n_T+1) a†a + gamma n_T a a†
};

/// -i[H,rho] + (gamma/2)(n_T+1) D[a]rho + (gamma/2) n_T D[a†]rho + k D[sigma_ee]rho.
/// The bath enters with the positive (physical) Lindblad sign.
ComplexOperator drift(const DensityMatrix& rho, const SimulationConfig& cfg);
ComplexOperator drift(const DensityMatrix& rho, const SmeOperators& ops, bool include_bath = true);

/// One Euler-Maruyama step of the conditioned equation followed by hygiene.
DensityMatrix step(const DensityMatrix& rho, double dW, const SimulationConfig& cfg);
DensityMatrix step(const DensityMatrix& rho, double dW, const SmeOperators& ops,
                   bool include_bath = true);

/// <sigma_ee>_rho on the joint space (sum of the qubit-excited diagonal).
double excited_population(const DensityMatrix& rho);

/// dY = <sigma_ee> dt + dW / sqrt(8k). Throws std::domain_error for k = 0.
double synthesize_record(const DensityMatrix& rho, double dW, const SimulationConfig& cfg);
double synthesize_record(double sigma_ee, double dW, double k, double dt);

/// dW = sqrt(8k) (dY - <sigma_ee> dt); inverse of synthesize_record.
double extract_innovation(double dY, const DensityMatrix& rho_est, const SimulationConfig& cfg);
double extract_innovation(double dY, double sigma_ee_est, double k, double dt);

/// rho -> J rho J† / Tr[J rho J†] with J = a† (up) or a (down) on the oscillator.
/// Throws std::domain_error when the jump has zero probability.
DensityMatrix apply_jump(const DensityMatrix& rho, JumpDirection direction);

// ---------------------------------------------------------------------------
// Trajectories.

/// Sampled observables of one trajectory. dY holds the record increments
/// summed over each sampling interval (zero at t = 0).
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> dY;
  std::vector<double> sigma_ee;
  std::vector<std::vector<double>> p_m;  ///< p_m[sample][m], m = 0..n_max
  std::vector<double> purity;
  std::vector<double> mean_n;            ///< <a†a>
  std::vector<double> leakage;           ///< population of |n_max,e>
  std::uint64_t seed = 0;
  std::string config_hash;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
  /// <N> = sum_m m p_m + (n_max+1) leakage at sample i.
  [[nodiscard]] double mean_excitation(std::size_t i) const;
};

/// Per-step measurement record as seen by an observer.
struct MeasurementRecord {
  double dt = 0.0;
  std::vector<double> dY;
};

enum class Backend {
  automatic,  ///< block-sparse when the state has no inter-subspace coherence
  dense,
  block,
};

struct RunOptions {
  Backend backend = Backend::automatic;
  bool keep_measurement = false;  ///< fill GeneratorResult::measurement
  bool keep_noise = false;        ///< fill per-step dW / innovations
  bool keep_states = false;       ///< store the state at every sample
  std::optional<DensityMatrix> initial_state;  ///< overrides the configured one
  std::span<const double> noise;  ///< externally supplied dW per step
};

struct GeneratorResult {
  TrajectoryRecord record;
  MeasurementRecord measurement;
  std::vector<double> noise;
  std::vector<DensityMatrix> states;
  DensityMatrix final_state;
  std::vector<JumpEvent> jumps;  ///< jumps applied to the true state
};

struct FilterResult {
  TrajectoryRecord record;
  std::vector<double> innovations;
  std::vector<DensityMatrix> states;
  DensityMatrix final_state;
};

/// Integrates the conditioned dynamics of the true system and synthesises the
/// record it emits. A non-empty jump schedule replaces the bath (no bath
/// dissipators); otherwise the bath follows cfg.bath.
GeneratorResult run_generator(const SimulationConfig& cfg, const RunOptions& options = {});

/// Conditions a state estimate on a measurement record, with the averaged bath
/// and no knowledge of jumps. record.dt must divide the sampling interval.
FilterResult run_filter(const MeasurementRecord& record, const SimulationConfig& cfg,
                        const RunOptions& options = {});

/// Ensemble-average master equation (stochastic term dropped).
GeneratorResult run_unconditional(const SimulationConfig& cfg, const RunOptions& options = {});

}  // namespace qnd

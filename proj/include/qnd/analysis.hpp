#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnd/sme.hpp"

namespace qnd {

/// Pointwise mean and unbiased standard deviation of one sampled series.
struct SeriesStats {
  std::vector<double> mean;
  std::vector<double> std;
};

struct EnsembleSummary {
  std::vector<double> times;
  SeriesStats dY;
  SeriesStats sigma_ee;
  SeriesStats purity;
  SeriesStats mean_n;
  SeriesStats leakage;
  std::vector<SeriesStats> p_m;  ///< indexed by m
  int n_trajectories = 0;
  std::vector<std::uint64_t> seeds;

  [[nodiscard]] const std::vector<double>& mean_purity() const { return purity.mean; }
  [[nodiscard]] const std::vector<double>& std_purity() const { return purity.std; }
};

/// Streaming form of aggregate(); records must be added in a fixed order for
/// bit-reproducible results.
class EnsembleAccumulator {
 public:
  void add(const TrajectoryRecord& record);
  [[nodiscard]] EnsembleSummary summary() const;
  [[nodiscard]] int count() const noexcept { return count_; }

 private:
  struct Welford {
    std::vector<double> mean;
    std::vector<double> m2;
    void init(std::size_t n);
    void push(std::size_t i, double x, int count);
    [[nodiscard]] SeriesStats stats(int count) const;
  };

  int count_ = 0;
  std::vector<double> times_;
  std::vector<std::uint64_t> seeds_;
  Welford dY_, sigma_ee_, purity_, mean_n_, leakage_;
  std::vector<Welford> p_m_;
};

/// Throws std::invalid_argument for an empty list or mismatched time grids.
EnsembleSummary aggregate(std::span<const TrajectoryRecord> records);

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PurityFit {
  double p0 = 0.0;
  double tau = 0.0;       ///< in units of 1/g
  double residual = 0.0;  ///< RMS of P_data - P_model over all points
  int n_points_used = 0;
};

/// Points with 1 - P at or below this are excluded from the log-space fit.
inline constexpr double kSaturationFloor = 1e-3;

/// Fits P(t) = 1 - (1 - P0) exp(-t/tau) with P0 pinned to the first sample,
/// by least squares on log(1 - P) over the unsaturated points.
PurityFit fit_purity(std::span<const double> times, std::span<const double> purity);
PurityFit fit_purity(const EnsembleSummary& summary);

/// Configuration used for one k of a sweep: dt tightened to the default for
/// that k if needed, sampling interval kept.
SimulationConfig config_for_k(const SimulationConfig& base, double k);

struct SweepEntry {
  double k = 0.0;
  std::optional<PurityFit> fit;
  std::string error;  ///< set when the fit (or the runs) failed
  int n_trajectories = 0;
  std::vector<std::uint64_t> seeds;
  EnsembleSummary summary;
};

/// For each k: n_traj generator trajectories seeded by
/// derive_seed(base.seed, k, index), aggregated and fitted. Failures for one
/// k are recorded in its entry and the sweep continues.
std::vector<SweepEntry> sweep_tau(std::span<const double> k_values, const SimulationConfig& base,
                                  int n_traj, int workers = 0);

struct Collapse {
  double time = 0.0;
  int m = 0;
};

/// First sample time at which one subspace holds at least `threshold` of the
/// population and keeps holding it for `dwell` (1/g by default).
std::optional<Collapse> collapse_metrics(const TrajectoryRecord& record, double threshold,
                                         double dwell = 1.0);

/// Piecewise-constant reference with a single jump.
struct StepFunction {
  double t_jump = 0.0;
  double before = 0.0;
  double after = 0.0;
  [[nodiscard]] double operator()(double t) const { return t < t_jump ? before : after; }
};

/// Time from the jump until `values` enters the band |v - after| < band and
/// stays there for `dwell`. Empty if that never happens within the record.
std::optional<double> jump_detection(std::span<const double> times,
                                     std::span<const double> values, const StepFunction& truth,
                                     double band = 0.5, double dwell = 2.0);

/// One pure component of a state without inter-subspace coherence:
/// weight * |psi><psi| with psi supported on total-excitation subspace m.
struct AnsatzComponent {
  int m = 0;
  double weight = 0.0;
  Eigen::VectorXcd psi;  ///< joint-space vector
};

struct ReducedDynamicsResult {
  std::vector<double> times;
  std::vector<std::vector<double>> full_p;     ///< from the full conditioned equation
  std::vector<std::vector<double>> reduced_p;  ///< from dp_m = sqrt(8k) p_m (<B>_m - <B>) dW
  [[nodiscard]] double sup_difference() const;
};

/// Co-integrates the full conditioned equation (dense) and the reduced
/// subspace-probability equations, plus a normalised stochastic Schrödinger
/// equation for each component, on the same noise path. Requires gamma = 0
/// and n_max <= 3. The noise path defaults to the seeded measurement stream.
ReducedDynamicsResult reduced_dynamics_oracle(std::span<const AnsatzComponent> components,
                                              const SimulationConfig& cfg,
                                              std::span<const double> noise = {});

}  // namespace qnd

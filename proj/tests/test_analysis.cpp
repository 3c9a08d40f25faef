#include <cmath>
#include <random>

#include "doctest.h"
#include "qnd/analysis.hpp"
#include "qnd/ensemble.hpp"
#include "qnd/noise.hpp"

using namespace qnd;

namespace {

TrajectoryRecord constant_record(double purity_value, std::size_t n = 5, int n_m = 3) {
  TrajectoryRecord r;
  for (std::size_t i = 0; i < n; ++i) {
    r.times.push_back(0.1 * static_cast<double>(i));
    r.dY.push_back(0.0);
    r.sigma_ee.push_back(0.5);
    r.purity.push_back(purity_value);
    r.mean_n.push_back(1.0);
    r.leakage.push_back(0.0);
    r.p_m.emplace_back(n_m, 1.0 / n_m);
  }
  return r;
}

std::vector<double> grid(int n, double step) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) {
    t[i] = step * i;
  }
  return t;
}

SimulationConfig light_config() {
  SimulationConfig cfg;
  cfg.model.n_max = 14;
  cfg.n_bar = 0.5;
  cfg.t_final = 3.0;
  cfg.dt = 1e-3;
  cfg.sample_every = 100;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("aggregate of one record has zero spread") {
  const std::vector<TrajectoryRecord> one{constant_record(0.3)};
  const auto s = aggregate(one);
  CHECK(s.n_trajectories == 1);
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    CHECK(s.mean_purity()[i] == 0.3);
    CHECK(s.std_purity()[i] == 0.0);
  }
}

TEST_CASE("aggregate uses the unbiased estimator") {
  const std::vector<TrajectoryRecord> two{constant_record(0.2), constant_record(0.4)};
  const auto s = aggregate(two);
  CHECK(s.mean_purity()[2] == doctest::Approx(0.3));
  CHECK(s.std_purity()[2] == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
  CHECK(s.p_m.size() == 3);
}

TEST_CASE("aggregate rejects bad input") {
  CHECK_THROWS_AS(aggregate(std::vector<TrajectoryRecord>{}), std::invalid_argument);
  std::vector<TrajectoryRecord> mixed{constant_record(0.2), constant_record(0.4, 6)};
  CHECK_THROWS_AS(aggregate(mixed), std::invalid_argument);
  auto shifted = constant_record(0.4);
  shifted.times[3] += 0.01;
  std::vector<TrajectoryRecord> off{constant_record(0.2), shifted};
  CHECK_THROWS_AS(aggregate(off), std::invalid_argument);
}

TEST_CASE("purity fit recovers generating parameters") {
  const auto t = grid(200, 0.1);
  for (double tau : {0.7, 5.0, 40.0}) {
    for (double p0 : {0.2, 0.5}) {
      std::vector<double> p;
      for (double x : t) {
        p.push_back(1.0 - (1.0 - p0) * std::exp(-x / tau));
      }
      const auto fit = fit_purity(t, p);
      CHECK(fit.tau == doctest::Approx(tau).epsilon(1e-6));
      CHECK(fit.p0 == doctest::Approx(p0).epsilon(1e-12));
      CHECK(fit.residual < 1e-9);
      CHECK(fit.residual >= 0.0);
    }
  }
}

TEST_CASE("purity fit is robust to small noise") {
  const auto t = grid(200, 0.1);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.01);
  int within = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double clean = 1.0 - 0.8 * std::exp(-t[i] / 5.0);
      p.push_back(i == 0 ? clean : std::min(clean + noise(rng), 1.0));
    }
    const auto fit = fit_purity(t, p);
    within += std::abs(fit.tau - 5.0) < 0.25 ? 1 : 0;
  }
  CHECK(within >= 95);
}

TEST_CASE("purity fit failure modes") {
  const auto t = grid(20, 0.1);
  CHECK_THROWS_AS(fit_purity(grid(5, 0.1), std::vector<double>(5, 0.5)), FitError);
  CHECK_THROWS_AS(fit_purity(t, std::vector<double>(20, 1.0)), FitError);
  std::vector<double> saturated(20, 0.9999);
  saturated[0] = 0.5;
  CHECK_THROWS_AS(fit_purity(t, saturated), FitError);
  std::vector<double> falling;
  for (double x : t) {
    falling.push_back(0.5 - 0.1 * x);
  }
  CHECK_THROWS_AS(fit_purity(t, falling), FitError);
}

TEST_CASE("collapse metrics") {
  auto pinned = constant_record(1.0, 40);
  for (auto& p : pinned.p_m) {
    p = {0.0, 0.0, 1.0};
  }
  const auto c = collapse_metrics(pinned, 0.95);
  REQUIRE(c.has_value());
  CHECK(c->time == 0.0);
  CHECK(c->m == 2);
  CHECK_FALSE(collapse_metrics(constant_record(0.3, 40), 0.95).has_value());
  CHECK_THROWS(collapse_metrics(pinned, 0.4));

  // A brief excursion above the threshold does not count.
  auto blip = constant_record(0.3, 60);
  blip.p_m[5] = {0.0, 0.97, 0.03};
  for (std::size_t i = 30; i < 60; ++i) {
    blip.p_m[i] = {0.0, 0.02, 0.98};
  }
  const auto later = collapse_metrics(blip, 0.95);
  REQUIRE(later.has_value());
  CHECK(later->time == doctest::Approx(3.0));
  CHECK(later->m == 2);
}

TEST_CASE("jump detection") {
  const auto t = grid(300, 0.05);
  const StepFunction truth{5.0, 2.0, 3.0};
  std::vector<double> exact;
  for (double x : t) {
    exact.push_back(truth(x));
  }
  const auto lag0 = jump_detection(t, exact, truth);
  REQUIRE(lag0.has_value());
  CHECK(*lag0 == doctest::Approx(0.0));
  CHECK_FALSE(jump_detection(t, std::vector<double>(t.size(), 2.0), truth).has_value());

  std::vector<double> slow;
  for (double x : t) {
    slow.push_back(x < 8.0 ? 2.0 : 3.1);
  }
  const auto lag = jump_detection(t, slow, truth);
  REQUIRE(lag.has_value());
  CHECK(*lag == doctest::Approx(3.0));
}

TEST_CASE("seeds depend only on base seed, k and index") {
  CHECK(derive_seed(1, 0.1, 3) == derive_seed(1, 0.1, 3));
  CHECK(derive_seed(1, 0.1, 3) != derive_seed(1, 0.1, 4));
  CHECK(derive_seed(1, 0.1, 3) != derive_seed(1, 1.0, 3));
  CHECK(derive_seed(1, 0.1, 3) != derive_seed(2, 0.1, 3));
}

TEST_CASE("ensembles are independent of the worker count") {
  const SimulationConfig cfg = light_config();
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> b;
  run_ensemble(cfg, 9, [&](std::size_t, GeneratorResult&& g) { a.push_back(g.record.purity); }, 1);
  run_ensemble(cfg, 9, [&](std::size_t, GeneratorResult&& g) { b.push_back(g.record.purity); }, 4);
  CHECK(a == b);
}

TEST_CASE("sweep entries do not depend on list position") {
  SimulationConfig cfg = light_config();
  cfg.t_final = 10.0;
  cfg.n_bar = 1.0;
  const std::vector<double> forward{0.3, 1.0};
  const std::vector<double> backward{1.0, 0.3, 0.3};
  const auto a = sweep_tau(forward, cfg, 4, 1);
  const auto b = sweep_tau(backward, cfg, 4, 2);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 3);
  CHECK(a[0].seeds == b[1].seeds);
  CHECK(a[1].seeds == b[0].seeds);
  CHECK(a[0].summary.purity.mean == b[1].summary.purity.mean);
  CHECK(b[1].summary.purity.mean == b[2].summary.purity.mean);
  REQUIRE(a[0].fit.has_value());
  REQUIRE(b[1].fit.has_value());
  CHECK(a[0].fit->tau == b[1].fit->tau);

  const std::vector<double> single{0.3};
  CHECK(sweep_tau(single, cfg, 2, 1).size() == 1);
}

TEST_CASE("sweep records per-k failures and continues") {
  SimulationConfig cfg = light_config();
  cfg.model.n_max = 2;
  cfg.n_bar = 3.0;  // orphan weight far above the limit
  const std::vector<double> ks{0.5};
  const auto out = sweep_tau(ks, cfg, 2, 1);
  REQUIRE(out.size() == 1);
  CHECK_FALSE(out[0].fit.has_value());
  CHECK_FALSE(out[0].error.empty());
}

TEST_CASE("config for a sweep point tightens dt and keeps the sampling interval") {
  SimulationConfig cfg = light_config();
  cfg.sample_every = 50;
  const auto strong = config_for_k(cfg, 10.0);
  CHECK(strong.dt == doctest::Approx(1e-4));
  CHECK(strong.sample_dt() == doctest::Approx(cfg.sample_dt()));
  const auto weak = config_for_k(cfg, 0.1);
  CHECK(weak.dt == cfg.dt);
  CHECK(weak.k == 0.1);
}

TEST_CASE("reduced dynamics of a single subspace is frozen") {
  SimulationConfig cfg;
  cfg.model.n_max = 3;
  cfg.k = 0.5;
  cfg.dt = 1e-3;
  cfg.t_final = 5.0;
  cfg.sample_every = 50;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
  psi(joint_index(1, Qubit::e)) = 1.0;
  const std::vector<AnsatzComponent> comps{{2, 1.0, psi}};
  const auto r = reduced_dynamics_oracle(comps, cfg);
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    CHECK(r.reduced_p[i][2] == doctest::Approx(1.0));
    CHECK(r.full_p[i][2] == doctest::Approx(1.0));
  }
}

TEST_CASE("indistinguishable subspaces keep their weights") {
  // Components with sigma_ee fixed at 0 in two subspaces never separate.
  SimulationConfig cfg;
  cfg.model.n_max = 3;
  cfg.model.g = 1e-9;
  cfg.k = 0.5;
  cfg.dt = 1e-3;
  cfg.t_final = 5.0;
  cfg.sample_every = 50;
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(8);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(8);
  a(joint_index(1, Qubit::g)) = 1.0;
  b(joint_index(3, Qubit::g)) = 1.0;
  const std::vector<AnsatzComponent> comps{{1, 0.4, a}, {3, 0.6, b}};
  const auto r = reduced_dynamics_oracle(comps, cfg);
  CHECK(r.full_p.back()[1] == doctest::Approx(0.4));
  CHECK(r.full_p.back()[3] == doctest::Approx(0.6));
  CHECK(r.reduced_p.back()[1] == doctest::Approx(0.4));
  CHECK(r.sup_difference() < 1e-9);
}

TEST_CASE("reduced dynamics agrees with the full equation and improves with dt") {
  SimulationConfig cfg;
  cfg.model.n_max = 3;
  cfg.k = 0.3;
  cfg.t_final = 5.0;
  std::vector<AnsatzComponent> comps;
  for (int m = 1; m <= 3; ++m) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
    psi(joint_index(m - 1, Qubit::e)) = 1.0;
    comps.push_back({m, 1.0 / m, psi});
  }
  // Each seed's Brownian path is used at two resolutions, 32x apart. Strong
  // order 1/2 predicts the sup error shrinks by about sqrt(32).
  const double fine_dt = 1e-3 / 32;
  const long fine_steps = std::lround(cfg.t_final / fine_dt);
  double err_fine = 0.0;
  double err_coarse = 0.0;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const NoiseStream noise(seed, kMeasurementStream);
    std::vector<double> fine(fine_steps);
    for (long i = 0; i < fine_steps; ++i) {
      fine[i] = noise.gaussian(i) * std::sqrt(fine_dt);
    }
    std::vector<double> coarse(fine_steps / 32, 0.0);
    for (long i = 0; i < fine_steps; ++i) {
      coarse[i / 32] += fine[i];
    }
    cfg.dt = fine_dt;
    cfg.sample_every = 1600;
    err_fine += reduced_dynamics_oracle(comps, cfg, fine).sup_difference() / 4;
    cfg.dt = 1e-3;
    cfg.sample_every = 50;
    err_coarse += reduced_dynamics_oracle(comps, cfg, coarse).sup_difference() / 4;
  }
  CHECK(err_fine < 1e-2);
  CHECK(err_fine < err_coarse / 2);
}

TEST_CASE("reduced dynamics refuses states outside the ansatz") {
  SimulationConfig cfg;
  cfg.model.n_max = 3;
  cfg.dt = 1e-3;
  cfg.t_final = 1.0;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(8);
  psi(joint_index(0, Qubit::e)) = 1.0;
  psi(joint_index(2, Qubit::g)) = 1e-6;  // leaks into subspace 2
  const std::vector<AnsatzComponent> bad{{1, 1.0, psi}};
  CHECK_THROWS_AS(reduced_dynamics_oracle(bad, cfg), std::invalid_argument);
  cfg.gamma = 0.1;
  Eigen::VectorXcd ok = Eigen::VectorXcd::Zero(8);
  ok(joint_index(0, Qubit::e)) = 1.0;
  const std::vector<AnsatzComponent> good{{1, 1.0, ok}};
  CHECK_THROWS(reduced_dynamics_oracle(good, cfg));
  cfg.gamma = 0.0;
  cfg.model.n_max = 5;
  CHECK_THROWS(reduced_dynamics_oracle(good, cfg));
}

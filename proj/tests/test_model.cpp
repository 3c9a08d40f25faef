#include <cmath>

#include "doctest.h"
#include "qnd/model.hpp"

using namespace qnd;

namespace {

ModelConfig model(int n_max, double omega = 0.0, double g = 1.0) {
  ModelConfig cfg;
  cfg.n_max = n_max;
  cfg.omega = omega;
  cfg.g = g;
  return cfg;
}

}  // namespace

TEST_CASE("annihilation operator") {
  ComplexOperator expect(2, 2);
  expect << 0.0, 1.0, 0.0, 0.0;
  CHECK(max_abs_diff(annihilation(1), expect) == 0.0);

  const ComplexOperator a = annihilation(6);
  const ComplexOperator n = a.adjoint() * a;
  for (int i = 0; i <= 6; ++i) {
    CHECK(n(i, i).real() == doctest::Approx(i));
  }
  ComplexOperator c = commutator(a, a.adjoint());
  CHECK(c(6, 6).real() == doctest::Approx(-6.0));
  c(6, 6) = 1.0;
  CHECK(max_abs_diff(c, identity(7)) < 1e-12);
}

TEST_CASE("qubit operators use the (g, e) order") {
  ComplexOperator see = ComplexOperator::Zero(2, 2);
  see(1, 1) = 1.0;
  CHECK(max_abs_diff(qubit_sigma(Qubit::e, Qubit::e), see) == 0.0);
  CHECK(max_abs_diff(qubit_sigma(Qubit::g, Qubit::e) * qubit_sigma(Qubit::e, Qubit::g),
                     qubit_sigma(Qubit::g, Qubit::g)) == 0.0);
  CHECK(max_abs_diff(qubit_sigma(Qubit::e, Qubit::g), dagger(qubit_sigma(Qubit::g, Qubit::e))) ==
        0.0);
  CHECK(parse_qubit("e") == Qubit::e);
  CHECK_THROWS(parse_qubit("x"));
}

TEST_CASE("joint ordering is oscillator then qubit") {
  const ModelConfig cfg = model(3);
  const JointOperators ops(cfg);
  CHECK(joint_index(2, Qubit::e) == 5);
  CHECK(ops.sigma_ee(joint_index(2, Qubit::e), joint_index(2, Qubit::e)).real() == 1.0);
  CHECK(ops.n_osc(joint_index(2, Qubit::g), joint_index(2, Qubit::g)).real() == doctest::Approx(2.0));
}

TEST_CASE("Hamiltonian matrix elements") {
  const ModelConfig cfg = model(5, 0.0, 0.7);
  const ComplexOperator h = build_hamiltonian(cfg);
  CHECK(h(joint_index(1, Qubit::g), joint_index(0, Qubit::e)).real() == doctest::Approx(0.7));
  CHECK(std::abs(h(0, 0)) == 0.0);
  CHECK(max_abs_diff(h, h.adjoint()) < 1e-12);

  // Splitting of the doublet {|n,e>, |n+1,g>} is 2 g sqrt(n+1).
  for (int n = 0; n < 5; ++n) {
    Eigen::Matrix2cd block;
    const Eigen::Index i = joint_index(n, Qubit::e);
    const Eigen::Index j = joint_index(n + 1, Qubit::g);
    block << h(i, i), h(i, j), h(j, i), h(j, j);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
    CHECK(es.eigenvalues()(1) - es.eigenvalues()(0) ==
          doctest::Approx(2.0 * 0.7 * std::sqrt(n + 1.0)));
  }
}

TEST_CASE("total excitation is conserved") {
  for (double omega : {0.0, 1.3}) {
    for (int n_max : {1, 4, 10}) {
      const ModelConfig cfg = model(n_max, omega);
      const ComplexOperator n = total_excitation(cfg);
      const ComplexOperator h = build_hamiltonian(cfg);
      CHECK(max_abs_diff(commutator(n, h), ComplexOperator::Zero(n.rows(), n.cols())) < 1e-12);
      CHECK(max_abs_diff(n, ComplexOperator(n.diagonal().asDiagonal())) == 0.0);
      CHECK(max_abs_diff(h, h.adjoint()) < 1e-12);
      CHECK(std::abs(n(0, 0)) == 0.0);
      for (int k = 0; k <= n_max; ++k) {
        const Eigen::Index i = joint_index(k, Qubit::e);
        CHECK(n(i, i).real() == doctest::Approx(k + 1));
      }
    }
  }
}

TEST_CASE("subspace decomposition") {
  const ModelConfig cfg = model(5);
  const auto sub = subspace_decomposition(cfg);
  REQUIRE(sub.projectors.size() == 6);
  CHECK(sub.dims.front() == 1);
  for (std::size_t m = 1; m < sub.dims.size(); ++m) {
    CHECK(sub.dims[m] == 2);
  }
  const ComplexOperator n = total_excitation(cfg);
  ComplexOperator sum = sub.orphan;
  for (std::size_t m = 0; m < sub.projectors.size(); ++m) {
    const ComplexOperator& p = sub.projectors[m];
    CHECK(max_abs_diff(p * p, p) < 1e-12);
    CHECK(max_abs_diff(p * n * p, static_cast<double>(m) * p) < 1e-12);
    for (std::size_t o = 0; o < sub.projectors.size(); ++o) {
      if (o != m) {
        CHECK(max_abs_diff(p * sub.projectors[o], ComplexOperator::Zero(12, 12)) < 1e-12);
      }
    }
    sum += p;
  }
  CHECK(max_abs_diff(sum, identity(12)) < 1e-12);
  CHECK(sub.orphan(joint_index(5, Qubit::e), joint_index(5, Qubit::e)).real() == 1.0);
}

TEST_CASE("thermal state") {
  const auto zero = thermal_state(0.0, 5);
  CHECK(zero.rho.op()(0, 0).real() == doctest::Approx(1.0));
  CHECK(zero.leakage == 0.0);

  const auto big = thermal_state(3.0, 200);
  CHECK(big.rho.op()(0, 0).real() == doctest::Approx(0.25));
  CHECK(big.rho.op()(1, 1).real() == doctest::Approx(0.1875));
  double mean = 0.0;
  for (int n = 0; n <= 200; ++n) {
    mean += n * big.rho.op()(n, n).real();
  }
  CHECK(mean == doctest::Approx(3.0).epsilon(1e-9));

  const auto cut = thermal_state(3.0, 25);
  CHECK(cut.leakage == doctest::Approx(std::pow(0.75, 26)).epsilon(1e-12));
  CHECK(cut.leakage < 1e-3);
  CHECK(std::abs(cut.rho.op().trace() - 1.0) < 1e-12);
  // Renormalised weights keep the geometric ratio.
  CHECK(cut.rho.op()(4, 4).real() / cut.rho.op()(3, 3).real() == doctest::Approx(0.75));
}

TEST_CASE("initial joint state") {
  const ModelConfig cfg = model(3);
  const auto rho = initial_joint_state(fock_state(0, 3), Qubit::e, cfg);
  CHECK(rho.op()(joint_index(0, Qubit::e), joint_index(0, Qubit::e)).real() == 1.0);
  const JointOperators ops(cfg);
  CHECK(expectation(rho, ops.sigma_ee).real() == doctest::Approx(1.0));
  CHECK_THROWS_AS(initial_joint_state(fock_state(0, 4), Qubit::e, cfg), DimensionError);

  const ModelConfig wide = model(90);
  const auto th = initial_joint_state(thermal_state(3.0, 90).rho, Qubit::e, wide);
  CHECK(purity(th) == doctest::Approx(1.0 / 7.0).epsilon(1e-9));
}

TEST_CASE("model config validation") {
  CHECK_THROWS(model(0).validate());
  CHECK_THROWS(model(3, -1.0).validate());
  CHECK_THROWS(model(3, 0.0, 0.0).validate());
  CHECK_NOTHROW(model(3).validate());
}

TEST_CASE("Rabi oscillation in an isolated doublet") {
  // Independent 2x2 solution: |n,e> -> cos(g sqrt(n+1) t)|n,e> - i sin(...)|n+1,g>.
  const ModelConfig cfg = model(6, 0.0, 1.0);
  const ComplexOperator h = build_hamiltonian(cfg);
  const JointOperators ops(cfg);
  for (int n : {0, 2, 4}) {
    for (double t : {0.3, 1.7, 12.5, 20.0}) {
      const ComplexOperator u = unitary_propagator(h, t);
      Eigen::VectorXcd psi = u.col(joint_index(n, Qubit::e));
      const double c = std::cos(std::sqrt(n + 1.0) * t);
      CHECK(std::norm(psi(joint_index(n, Qubit::e))) == doctest::Approx(c * c).epsilon(1e-10));
      CHECK(std::abs(psi(joint_index(n + 1, Qubit::g)) -
                     Complex(0, -std::sin(std::sqrt(n + 1.0) * t))) < 1e-10);
    }
  }
}

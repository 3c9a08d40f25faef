#include <cmath>
#include <random>

#include "doctest.h"
#include "qnd/algebra.hpp"
#include "qnd/model.hpp"

using namespace qnd;

namespace {

ComplexOperator random_operator(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  ComplexOperator m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      m(i, j) = Complex(n(rng), n(rng));
    }
  }
  return m;
}

DensityMatrix random_state(Eigen::Index dim, std::mt19937_64& rng) {
  const ComplexOperator a = random_operator(dim, rng);
  ComplexOperator rho = a * a.adjoint();
  rho /= rho.trace();
  return DensityMatrix(rho);
}

}  // namespace

TEST_CASE("kron of identities and diagonals") {
  CHECK(max_abs_diff(kron(identity(2), identity(2)), identity(4)) == 0.0);
  ComplexOperator d = ComplexOperator::Zero(2, 2);
  d(1, 1) = 1.0;
  const ComplexOperator out = kron(d, identity(2));
  ComplexOperator expect = ComplexOperator::Zero(4, 4);
  expect(2, 2) = 1.0;
  expect(3, 3) = 1.0;
  CHECK(max_abs_diff(out, expect) == 0.0);
}

TEST_CASE("kron matches the index definition and is associative") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexOperator a = random_operator(2, rng);
    const ComplexOperator b = random_operator(3, rng);
    const ComplexOperator c = random_operator(2, rng);
    const ComplexOperator ab = kron(a, b);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 3; ++k) {
          for (int l = 0; l < 3; ++l) {
            CHECK(std::abs(ab(i * 3 + k, j * 3 + l) - a(i, j) * b(k, l)) == 0.0);
          }
        }
      }
    }
    CHECK(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))) < 1e-12);
  }
}

TEST_CASE("kron refuses dimensions above the limit") {
  CHECK_THROWS_AS(kron(identity(100), identity(100)), DimensionError);
}

TEST_CASE("dagger") {
  std::mt19937_64 rng(2);
  const ComplexOperator a = random_operator(4, rng);
  CHECK(max_abs_diff(dagger(identity(3)), identity(3)) == 0.0);
  CHECK(max_abs_diff(dagger(dagger(a)), a) == 0.0);
  const ComplexOperator up = dagger(annihilation(4));
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double expect = (i == j + 1) ? std::sqrt(static_cast<double>(i)) : 0.0;
      CHECK(std::abs(up(i, j) - expect) < 1e-15);
    }
  }
}

TEST_CASE("operators are validated") {
  CHECK_THROWS(validate_operator(ComplexOperator::Zero(2, 3)));
  CHECK_THROWS(validate_operator(ComplexOperator::Zero(0, 0)));
  ComplexOperator bad = identity(2);
  bad(0, 1) = Complex(std::nan(""), 0.0);
  CHECK_THROWS(validate_operator(bad));
  CHECK_THROWS(DensityMatrix(bad));
}

TEST_CASE("expectation values") {
  const DensityMatrix e = DensityMatrix::basis_projector(2, 1);
  const DensityMatrix g = DensityMatrix::basis_projector(2, 0);
  const ComplexOperator see = qubit_sigma(Qubit::e, Qubit::e);
  CHECK(std::abs(expectation(e, see) - 1.0) < 1e-15);
  CHECK(std::abs(expectation(g, see)) < 1e-15);
  CHECK_THROWS_AS(expectation(e, identity(3)), DimensionError);

  // Mean of the renormalised geometric distribution on 0..60.
  const auto th = thermal_state(3.0, 60);
  const ComplexOperator a = annihilation(60);
  double num = 0.0;
  double den = 0.0;
  for (int n = 0; n <= 60; ++n) {
    num += n * std::pow(0.75, n);
    den += std::pow(0.75, n);
  }
  CHECK(std::abs(expectation(th.rho, a.adjoint() * a).real() - num / den) < 1e-12);
  CHECK(std::abs(num / den - 3.0) < 1e-5);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho = random_state(6, rng);
    CHECK(std::abs(expectation(rho, identity(6)) - 1.0) < 1e-10);
    const ComplexOperator h = random_operator(6, rng);
    CHECK(std::abs(expectation(rho, h + h.adjoint()).imag()) < 1e-9);
  }
}

TEST_CASE("purity") {
  Eigen::VectorXcd psi(3);
  psi << Complex(1, 1), 2.0, Complex(0, -1);
  CHECK(purity(DensityMatrix::pure(psi)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(purity(DensityMatrix::maximally_mixed(5)) == doctest::Approx(0.2).epsilon(1e-14));
  // Sum of squared Bose-Einstein weights is 1 / (1 + 2 n_bar).
  const ModelConfig cfg{0.0, 1.0, 80};
  const auto joint = initial_joint_state(thermal_state(3.0, 80).rho, Qubit::e, cfg);
  CHECK(purity(joint) == doctest::Approx(1.0 / 7.0).epsilon(1e-9));
}

TEST_CASE("hygiene restores Hermiticity and trace") {
  std::mt19937_64 rng(4);
  const DensityMatrix rho = random_state(5, rng);
  CHECK(max_abs_diff(enforce_hygiene(rho).op(), rho.op()) < 1e-15);
  CHECK(max_abs_diff(enforce_hygiene(DensityMatrix(1.01 * rho.op())).op(), rho.op()) < 1e-15);

  const ComplexOperator h = random_operator(5, rng);
  const ComplexOperator skew = Complex(0, 1) * (h + h.adjoint());  // anti-Hermitian
  const DensityMatrix out = enforce_hygiene(DensityMatrix(rho.op() + 1e-3 * skew));
  CHECK(max_abs_diff(out.op(), out.op().adjoint()) < 1e-15);
  CHECK(std::abs(out.op().trace() - 1.0) < 1e-12);
  CHECK(purity(out) <= 1.0 + 1e-9);

  CHECK_THROWS_AS(enforce_hygiene(DensityMatrix(-1.0 * rho.op())), IntegrationDivergence);
}

TEST_CASE("purity after hygiene never exceeds one") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> scale(0.9, 1.1);
  for (int trial = 0; trial < 50; ++trial) {
    const DensityMatrix rho = random_state(4, rng);
    const ComplexOperator noise = random_operator(4, rng);
    const DensityMatrix out =
        enforce_hygiene(DensityMatrix(scale(rng) * rho.op() + 1e-6 * noise));
    CHECK(purity(out) <= 1.0 + 1e-9);
  }
}

TEST_CASE("eigenvalue helpers") {
  CHECK(min_eigenvalue(DensityMatrix::maximally_mixed(4)) == doctest::Approx(0.25));
  const DensityMatrix a = DensityMatrix::basis_projector(2, 0);
  const DensityMatrix b = DensityMatrix::basis_projector(2, 1);
  CHECK(trace_distance(a, b) == doctest::Approx(1.0));
  CHECK(trace_distance(a, a) == doctest::Approx(0.0));
}

TEST_CASE("unitary propagator") {
  std::mt19937_64 rng(6);
  const ComplexOperator h0 = random_operator(4, rng);
  const ComplexOperator h = h0 + h0.adjoint();
  const ComplexOperator u = unitary_propagator(h, 0.3);
  CHECK(max_abs_diff(u * u.adjoint(), identity(4)) < 1e-12);
  CHECK(max_abs_diff(unitary_propagator(h, 0.1) * unitary_propagator(h, 0.2), u) < 1e-12);
  // Small-time expansion.
  const ComplexOperator small = unitary_propagator(h, 1e-6);
  CHECK(max_abs_diff(small, identity(4) - Complex(0, 1e-6) * h) < 1e-10);
}

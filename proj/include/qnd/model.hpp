#pragma once

#include <string_view>
#include <vector>

#include "qnd/algebra.hpp"

namespace qnd {

enum class Qubit { g = 0, e = 1 };

/// Physical parameters of the resonant Jaynes-Cummings system, in units where
/// hbar = 1 and g sets the time scale.
struct ModelConfig {
  double omega = 0.0;  ///< oscillator and qubit level spacing (rotating frame by default)
  double g = 1.0;      ///< coupling strength
  int n_max = 25;      ///< Fock-space truncation, oscillator levels 0..n_max

  void validate() const;
  [[nodiscard]] Eigen::Index joint_dim() const { return 2 * (n_max + 1); }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Joint index of |n, q> in the oscillator ⊗ qubit basis.
constexpr Eigen::Index joint_index(int n, Qubit q) { return 2 * n + static_cast<int>(q); }

ComplexOperator annihilation(int n_max);
ComplexOperator qubit_sigma(Qubit i, Qubit j);
/// Parses "g" / "e"; throws std::invalid_argument otherwise.
Qubit parse_qubit(std::string_view label);

/// Frequently used joint-space operators for one ModelConfig.
struct JointOperators {
  ComplexOperator a;         ///< a ⊗ I
  ComplexOperator a_dag;     ///< a† ⊗ I
  ComplexOperator n_osc;     ///< a†a ⊗ I
  ComplexOperator sigma_ee;  ///< I ⊗ σ_ee
  ComplexOperator total;     ///< N = a†a ⊗ I + I ⊗ σ_ee

  explicit JointOperators(const ModelConfig& cfg);
};

/// H = ω(a†a + σ_ee) + g(a† σ_ge + a σ_eg).
ComplexOperator build_hamiltonian(const ModelConfig& cfg);

/// N = a†a ⊗ I + I ⊗ σ_ee; the conserved total excitation number.
ComplexOperator total_excitation(const ModelConfig& cfg);

/// Eigenspaces of the total excitation number retained by the truncation.
///
/// Subspace m (0 <= m <= n_max) is spanned by |m,g> and |m-1,e> (only |0,g>
/// for m = 0). The truncation orphan |n_max,e> has m = n_max + 1 but no
/// partner; it is not part of the decomposition and is tracked as leakage.
struct SubspaceDecomposition {
  std::vector<ComplexOperator> projectors;
  std::vector<int> dims;
  ComplexOperator orphan;  ///< |n_max,e><n_max,e|
};

SubspaceDecomposition subspace_decomposition(const ModelConfig& cfg);

struct ThermalState {
  DensityMatrix rho;
  /// Bose-Einstein weight beyond the truncation, (n̄/(1+n̄))^(n_max+1).
  double leakage = 0.0;
};

/// Oscillator thermal state with Bose-Einstein weights renormalised on 0..n_max.
ThermalState thermal_state(double n_bar, int n_max);

/// Oscillator Fock state |n><n|.
DensityMatrix fock_state(int n, int n_max);

/// rho_osc ⊗ |q><q|.
DensityMatrix initial_joint_state(const DensityMatrix& rho_osc, Qubit qubit, const ModelConfig& cfg);

}  // namespace qnd

#pragma once

#include <vector>

#include "qnd/sme.hpp"

namespace qnd {

/// Observables recorded at one sample.
struct Observables {
  double sigma_ee = 0.0;
  double purity = 0.0;
  double mean_n = 0.0;
  double leakage = 0.0;
  std::vector<double> p_m;
};

/// Which bath terms a kernel integrates.
enum class BathMode {
  none,     ///< no bath (the true state between scheduled jumps)
  no_jump,  ///< conditional no-jump evolution between sampled bath jumps
  averaged, ///< full bath dissipators
};

/// A density matrix with no coherence between different total-excitation
/// subspaces, stored as one 2x2 block per subspace.
///
/// Block m covers the joint indices {2m-1, 2m}: slot 0 is |m-1,e>, slot 1 is
/// |m,g>. Slots that fall outside the truncated space (slot 0 of block 0,
/// slot 1 of the orphan block n_max+1) are kept at zero.
class BlockState {
 public:
  using Block = Eigen::Matrix2cd;

  BlockState() = default;
  explicit BlockState(int n_max);

  /// Throws std::invalid_argument if rho carries coherences between
  /// subspaces larger than tol.
  static BlockState from_dense(const DensityMatrix& rho, double tol = 1e-12);
  [[nodiscard]] DensityMatrix to_dense() const;

  [[nodiscard]] int n_max() const noexcept { return n_max_; }
  [[nodiscard]] int n_blocks() const noexcept { return static_cast<int>(blocks_.size()); }
  Block& block(int m) { return blocks_[m]; }
  [[nodiscard]] const Block& block(int m) const { return blocks_[m]; }

 private:
  int n_max_ = 0;
  std::vector<Block> blocks_;
};

/// True if every entry of rho outside the excitation blocks is below tol.
bool is_block_diagonal(const DensityMatrix& rho, double tol = 1e-12);

/// Reference integrator on full dense matrices. Supports both schemes.
class DenseKernel {
 public:
  using State = DensityMatrix;

  DenseKernel(const SmeOperators& ops, BathMode bath);

  [[nodiscard]] double sigma_ee(const State& s) const;
  /// One conditioned step driven by the innovation dW.
  void conditioned_step(State& s, double dW) const;
  void unconditioned_step(State& s) const;
  /// <J†J> for the jump operator of the given direction (a† up, a down).
  [[nodiscard]] double jump_weight(const State& s, JumpDirection direction) const;
  void jump(State& s, JumpDirection direction) const;
  [[nodiscard]] Observables observe(const State& s) const;
  [[nodiscard]] double min_eigenvalue(const State& s) const;
  [[nodiscard]] DensityMatrix to_dense(const State& s) const { return s; }

 private:
  void kraus_update(State& s, double dW, double eta) const;

  const SmeOperators& ops_;
  BathMode bath_;
  ComplexOperator c_;          // sqrt(2k) sigma_ee
  ComplexOperator base_m_;     // I - (c†c + bath rate)/2 dt
};

/// Integrator on BlockState; Kraus scheme only. O(n_max) per step.
class BlockKernel {
 public:
  using State = BlockState;

  BlockKernel(const SmeOperators& ops, BathMode bath);

  [[nodiscard]] double sigma_ee(const State& s) const;
  void conditioned_step(State& s, double dW) const;
  void unconditioned_step(State& s) const;
  [[nodiscard]] double jump_weight(const State& s, JumpDirection direction) const;
  void jump(State& s, JumpDirection direction) const;
  [[nodiscard]] Observables observe(const State& s) const;
  [[nodiscard]] double min_eigenvalue(const State& s) const;
  [[nodiscard]] DensityMatrix to_dense(const State& s) const { return s.to_dense(); }

 private:
  void kraus_update(State& s, double dW, double eta) const;

  const SmeOperators& ops_;
  BathMode bath_;
  int n_blocks_;
  double c_;  // sqrt(2k), acting on slot 0 of every block
  std::vector<BlockState::Block> propagator_;
  std::vector<Eigen::Vector2d> base_m_;   // diagonal of I - (c†c + bath rate)/2 dt
  std::vector<BlockState::Block> lower_;  // a restricted to block m -> m-1 (index m)
  std::vector<Eigen::Vector2d> n_osc_;    // diagonal of a†a
  std::vector<Eigen::Vector2d> n_osc_raised_;  // diagonal of a a†
  double loss_rate_;
  double gain_rate_;
};

}  // namespace qnd

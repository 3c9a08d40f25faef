#include "qnd/kernels.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qnd {

namespace {

// Joint index of slot s in block m, or -1 when the slot lies outside the
// truncated space.
Eigen::Index slot_index(int m, int s, Eigen::Index dim) {
  const Eigen::Index idx = 2 * static_cast<Eigen::Index>(m) - 1 + s;
  return (idx >= 0 && idx < dim) ? idx : -1;
}

BlockState::Block slice(const ComplexOperator& op, int row_block, int col_block) {
  BlockState::Block out = BlockState::Block::Zero();
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 2; ++t) {
      const Eigen::Index i = slot_index(row_block, s, op.rows());
      const Eigen::Index j = slot_index(col_block, t, op.cols());
      if (i >= 0 && j >= 0) {
        out(s, t) = op(i, j);
      }
    }
  }
  return out;
}

Eigen::Vector2d real_diagonal(const BlockState::Block& b) {
  return {b(0, 0).real(), b(1, 1).real()};
}

double block_min_eigenvalue(const BlockState::Block& b) {
  const double a = b(0, 0).real();
  const double d = b(1, 1).real();
  const double off = std::abs(0.5 * (b(0, 1) + std::conj(b(1, 0))));
  return 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + off * off);
}

void hermitize(BlockState::Block& b) {
  const Complex off = 0.5 * (b(0, 1) + std::conj(b(1, 0)));
  b(0, 1) = off;
  b(1, 0) = std::conj(off);
  b(0, 0) = b(0, 0).real();
  b(1, 1) = b(1, 1).real();
}

}  // namespace

// ---------------------------------------------------------------------------
// BlockState

BlockState::BlockState(int n_max)
    : n_max_(n_max), blocks_(static_cast<std::size_t>(n_max) + 2, Block::Zero()) {}

bool is_block_diagonal(const DensityMatrix& rho, double tol) {
  const Eigen::Index dim = rho.dim();
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      // Block of joint index i is (i + 1) / 2.
      if ((i + 1) / 2 != (j + 1) / 2 && std::abs(rho.op()(i, j)) > tol) {
        return false;
      }
    }
  }
  return true;
}

BlockState BlockState::from_dense(const DensityMatrix& rho, double tol) {
  if (rho.dim() < 4 || rho.dim() % 2 != 0) {
    throw DimensionError("BlockState: state is not an oscillator ⊗ qubit state");
  }
  if (!is_block_diagonal(rho, tol)) {
    throw std::invalid_argument("BlockState: state has coherences between excitation subspaces");
  }
  BlockState out(static_cast<int>(rho.dim() / 2 - 1));
  for (int m = 0; m < out.n_blocks(); ++m) {
    out.blocks_[m] = slice(rho.op(), m, m);
  }
  return out;
}

DensityMatrix BlockState::to_dense() const {
  const Eigen::Index dim = 2 * (static_cast<Eigen::Index>(n_max_) + 1);
  ComplexOperator op = ComplexOperator::Zero(dim, dim);
  for (int m = 0; m < n_blocks(); ++m) {
    for (int s = 0; s < 2; ++s) {
      for (int t = 0; t < 2; ++t) {
        const Eigen::Index i = slot_index(m, s, dim);
        const Eigen::Index j = slot_index(m, t, dim);
        if (i >= 0 && j >= 0) {
          op(i, j) = blocks_[m](s, t);
        }
      }
    }
  }
  return DensityMatrix(std::move(op));
}

// ---------------------------------------------------------------------------
// DenseKernel

DenseKernel::DenseKernel(const SmeOperators& ops, BathMode bath) : ops_(ops), bath_(bath) {
  const Eigen::Index dim = ops.cfg.model.joint_dim();
  c_ = std::sqrt(2.0 * ops.cfg.k) * ops.measured;
  ComplexOperator rate = c_.adjoint() * c_;
  if (bath_ != BathMode::none) {
    rate += ops.bath_rate;
  }
  // sqrt(1 - dt rate) rather than 1 - dt rate / 2: with it the no-record map is
  // exactly trace preserving, so unconditional p_m stay constant to rounding.
  const ComplexOperator keep = identity(dim) - ops.cfg.dt * rate;
  const Eigen::SelfAdjointEigenSolver<ComplexOperator> es(keep);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("dt too large for the measurement and bath rates");
  }
  base_m_ = es.operatorSqrt();
}

double DenseKernel::sigma_ee(const State& s) const { return excited_population(s); }

void DenseKernel::kraus_update(State& s, double dW, double eta) const {
  const double dt = ops_.cfg.dt;
  const double b = sigma_ee(s);
  const ComplexOperator& u = ops_.propagator;
  const ComplexOperator rotated = u * s.op() * u.adjoint();
  const double dy = dW + 2.0 * eta * std::sqrt(2.0 * ops_.cfg.k) * b * dt;
  const ComplexOperator m = base_m_ + (eta * dy) * c_;
  ComplexOperator next = m * rotated * m.adjoint();
  next += (1.0 - eta * eta) * dt * (c_ * rotated * c_.adjoint());
  if (bath_ == BathMode::averaged && ops_.cfg.gamma > 0.0) {
    next += dt * (ops_.bath_loss * rotated * ops_.bath_loss.adjoint());
    next += dt * (ops_.bath_gain * rotated * ops_.bath_gain.adjoint());
  }
  s = enforce_hygiene(DensityMatrix(std::move(next)));
}

void DenseKernel::conditioned_step(State& s, double dW) const {
  if (ops_.cfg.scheme == Scheme::kraus) {
    kraus_update(s, dW, ops_.cfg.eta);
    return;
  }
  const double dt = ops_.cfg.dt;
  ComplexOperator next = s.op() + drift(s, ops_, bath_ == BathMode::averaged) * dt;
  if (ops_.cfg.k > 0.0) {
    next += std::sqrt(2.0 * ops_.cfg.k) * ops_.cfg.eta * info_gain(ops_.measured, s) * dW;
  }
  if (bath_ == BathMode::no_jump) {
    const Complex mean_rate = expectation(s, ops_.bath_rate);
    next -= 0.5 * dt *
            (ops_.bath_rate * s.op() + s.op() * ops_.bath_rate - 2.0 * mean_rate * s.op());
  }
  s = enforce_hygiene(DensityMatrix(std::move(next)));
}

void DenseKernel::unconditioned_step(State& s) const {
  if (ops_.cfg.scheme == Scheme::kraus) {
    kraus_update(s, 0.0, 0.0);
    return;
  }
  ComplexOperator next = s.op() + drift(s, ops_, bath_ == BathMode::averaged) * ops_.cfg.dt;
  s = enforce_hygiene(DensityMatrix(std::move(next)));
}

double DenseKernel::jump_weight(const State& s, JumpDirection direction) const {
  const ComplexOperator& j = direction == JumpDirection::up ? ops_.joint.a_dag : ops_.joint.a;
  return expectation(s, j.adjoint() * j).real();
}

void DenseKernel::jump(State& s, JumpDirection direction) const {
  s = apply_jump(s, direction);
}

Observables DenseKernel::observe(const State& s) const {
  Observables out;
  const int n_max = ops_.cfg.model.n_max;
  const auto& r = s.op();
  out.sigma_ee = excited_population(s);
  out.purity = purity(s);
  out.p_m.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int m = 0; m <= n_max; ++m) {
    double p = r(joint_index(m, Qubit::g), joint_index(m, Qubit::g)).real();
    if (m >= 1) {
      p += r(joint_index(m - 1, Qubit::e), joint_index(m - 1, Qubit::e)).real();
    }
    out.p_m[m] = p;
  }
  const Eigen::Index orphan = joint_index(n_max, Qubit::e);
  out.leakage = r(orphan, orphan).real();
  for (int n = 0; n <= n_max; ++n) {
    out.mean_n += n * (r(joint_index(n, Qubit::g), joint_index(n, Qubit::g)).real() +
                       r(joint_index(n, Qubit::e), joint_index(n, Qubit::e)).real());
  }
  return out;
}

double DenseKernel::min_eigenvalue(const State& s) const { return qnd::min_eigenvalue(s); }

// ---------------------------------------------------------------------------
// BlockKernel

BlockKernel::BlockKernel(const SmeOperators& ops, BathMode bath)
    : ops_(ops),
      bath_(bath),
      n_blocks_(ops.cfg.model.n_max + 2),
      c_(std::sqrt(2.0 * ops.cfg.k)),
      loss_rate_(ops.cfg.gamma * (ops.cfg.n_T + 1.0)),
      gain_rate_(ops.cfg.gamma * ops.cfg.n_T) {
  if (ops.cfg.scheme != Scheme::kraus) {
    throw std::invalid_argument("BlockKernel supports the kraus scheme only");
  }
  const double dt = ops.cfg.dt;
  const ComplexOperator raised = ops.joint.a * ops.joint.a_dag;
  propagator_.resize(n_blocks_);
  base_m_.resize(n_blocks_);
  lower_.assign(n_blocks_, BlockState::Block::Zero());
  n_osc_.resize(n_blocks_);
  n_osc_raised_.resize(n_blocks_);
  for (int m = 0; m < n_blocks_; ++m) {
    propagator_[m] = slice(ops.propagator, m, m);
    n_osc_[m] = real_diagonal(slice(ops.joint.n_osc, m, m));
    n_osc_raised_[m] = real_diagonal(slice(raised, m, m));
    Eigen::Vector2d rate(c_ * c_, 0.0);  // c†c = 2k sigma_ee, slot 0 is |m-1,e>
    if (bath_ != BathMode::none) {
      rate += real_diagonal(slice(ops.bath_rate, m, m));
    }
    const Eigen::Vector2d keep = Eigen::Vector2d::Ones() - dt * rate;
    if (keep.minCoeff() <= 0.0) {
      throw std::invalid_argument("dt too large for the measurement and bath rates");
    }
    base_m_[m] = keep.cwiseSqrt();
    if (m >= 1) {
      lower_[m] = slice(ops.joint.a, m - 1, m);
    }
  }
  // Leaving the padding slot of block 0 empty keeps slice() honest: the
  // operators above must not couple different blocks.
  const double tol = 1e-12;
  for (int m = 0; m < n_blocks_; ++m) {
    for (int other = 0; other < n_blocks_; ++other) {
      if (other == m) {
        continue;
      }
      if (slice(ops.propagator, m, other).cwiseAbs().maxCoeff() > tol ||
          slice(ops.bath_rate, m, other).cwiseAbs().maxCoeff() > tol) {
        throw std::logic_error("BlockKernel: operator couples excitation subspaces");
      }
    }
  }
}

double BlockKernel::sigma_ee(const State& s) const {
  double sum = 0.0;
  for (int m = 0; m < n_blocks_; ++m) {
    sum += s.block(m)(0, 0).real();
  }
  return sum;
}

void BlockKernel::kraus_update(State& s, double dW, double eta) const {
  const double dt = ops_.cfg.dt;
  const double b = sigma_ee(s);
  const double dy = dW + 2.0 * eta * c_ * b * dt;
  const double measured_feed = (1.0 - eta * eta) * dt * c_ * c_;
  const bool feed_bath = bath_ == BathMode::averaged && ops_.cfg.gamma > 0.0;

  thread_local std::vector<BlockState::Block> rotated;
  if (feed_bath) {
    rotated.resize(n_blocks_);
  }
  double trace = 0.0;
  for (int m = 0; m < n_blocks_; ++m) {
    BlockState::Block& blk = s.block(m);
    const BlockState::Block& u = propagator_[m];
    const BlockState::Block r = u * blk * u.adjoint();
    const Complex mu0 = base_m_[m](0) + eta * c_ * dy;
    const double mu1 = base_m_[m](1);
    blk(0, 0) = std::norm(mu0) * r(0, 0) + measured_feed * r(0, 0);
    blk(0, 1) = mu0 * r(0, 1) * mu1;
    blk(1, 0) = mu1 * r(1, 0) * std::conj(mu0);
    blk(1, 1) = mu1 * mu1 * r(1, 1);
    if (feed_bath) {
      rotated[m] = r;
    }
  }
  if (feed_bath) {
    for (int m = 1; m < n_blocks_; ++m) {
      const BlockState::Block& a = lower_[m];
      s.block(m - 1) += (loss_rate_ * dt) * (a * rotated[m] * a.adjoint());
      s.block(m) += (gain_rate_ * dt) * (a.adjoint() * rotated[m - 1] * a);
    }
  }
  for (int m = 0; m < n_blocks_; ++m) {
    hermitize(s.block(m));
    trace += s.block(m).trace().real();
  }
  if (!(trace > 0.0) || !std::isfinite(trace)) {
    std::ostringstream msg;
    msg << "density matrix trace became " << trace << "; integration diverged (reduce dt)";
    throw IntegrationDivergence(msg.str());
  }
  const double inv = 1.0 / trace;
  for (int m = 0; m < n_blocks_; ++m) {
    s.block(m) *= inv;
  }
}

void BlockKernel::conditioned_step(State& s, double dW) const {
  kraus_update(s, dW, ops_.cfg.eta);
}

void BlockKernel::unconditioned_step(State& s) const { kraus_update(s, 0.0, 0.0); }

double BlockKernel::jump_weight(const State& s, JumpDirection direction) const {
  const auto& diag = direction == JumpDirection::up ? n_osc_raised_ : n_osc_;
  double sum = 0.0;
  for (int m = 0; m < n_blocks_; ++m) {
    sum += diag[m](0) * s.block(m)(0, 0).real() + diag[m](1) * s.block(m)(1, 1).real();
  }
  return sum;
}

void BlockKernel::jump(State& s, JumpDirection direction) const {
  State next(s.n_max());
  for (int m = 1; m < n_blocks_; ++m) {
    const BlockState::Block& a = lower_[m];
    if (direction == JumpDirection::down) {
      next.block(m - 1) = a * s.block(m) * a.adjoint();
    } else {
      next.block(m) = a.adjoint() * s.block(m - 1) * a;
    }
  }
  double weight = 0.0;
  for (int m = 0; m < n_blocks_; ++m) {
    hermitize(next.block(m));
    weight += next.block(m).trace().real();
  }
  if (!(weight > 1e-300)) {
    throw std::domain_error("apply_jump: zero norm after jump");
  }
  for (int m = 0; m < n_blocks_; ++m) {
    next.block(m) /= weight;
  }
  s = std::move(next);
}

Observables BlockKernel::observe(const State& s) const {
  Observables out;
  const int n_max = ops_.cfg.model.n_max;
  out.p_m.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int m = 0; m < n_blocks_; ++m) {
    const BlockState::Block& blk = s.block(m);
    const double pe = blk(0, 0).real();
    const double pg = blk(1, 1).real();
    out.sigma_ee += pe;
    out.purity += blk.cwiseAbs2().sum();
    out.mean_n += n_osc_[m](0) * pe + n_osc_[m](1) * pg;
    if (m <= n_max) {
      out.p_m[m] = pe + pg;
    } else {
      out.leakage = pe;
    }
  }
  return out;
}

double BlockKernel::min_eigenvalue(const State& s) const {
  double lo = std::numeric_limits<double>::infinity();
  for (int m = 0; m < n_blocks_; ++m) {
    lo = std::min(lo, block_min_eigenvalue(s.block(m)));
  }
  return lo;
}

}  // namespace qnd

#include "pbftrel/qbd.hpp"

#include <Eigen/LU>
#include <cmath>
#include <string>
#include <vector>

#include "pbftrel/errors.hpp"
#include "pbftrel/linalg.hpp"

namespace pbftrel {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Places `block` on every diagonal position of a b x b block grid.
void fill_diagonal(MatrixXd& m, const MatrixXd& block, int b) {
  for (int r = 0; r < b; ++r) {
    m.block(r * block.rows(), r * block.cols(), block.rows(), block.cols()) += block;
  }
}

}  // namespace

QbdBlocks build_qbd_blocks(const PhaseTypeRep& ext_block, const PhaseTypeRep& ext_orphan,
                           double lambda, int b, std::size_t cap) {
  if (b < 1) throw ValidationError("b", "b must be at least 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("lambda", "lambda must be non-negative");
  }
  const Eigen::Index ds = ext_orphan.order();
  const Eigen::Index dt = ext_block.order();
  const auto level_dim = static_cast<std::size_t>(b) * ds * dt;
  if (level_dim > cap) throw DimensionError(level_dim, cap);

  const MatrixXd S = ext_orphan.subgenerator().dense();
  const MatrixXd T = ext_block.subgenerator().dense();
  const MatrixXd s_restart = ext_orphan.exit() * ext_orphan.initial().transpose();
  const MatrixXd t_restart = ext_block.exit() * ext_block.initial().transpose();
  const MatrixXd alpha = ext_block.initial().transpose();
  const MatrixXd t_exit = ext_block.exit();
  const MatrixXd Is = MatrixXd::Identity(ds, ds);
  const MatrixXd It = MatrixXd::Identity(dt, dt);
  const MatrixXd Ids = MatrixXd::Identity(ds * dt, ds * dt);

  const Eigen::Index d0 = b * ds;
  const Eigen::Index d = b * ds * dt;
  QbdBlocks q;
  q.b = b;
  q.lambda = lambda;
  q.orphan_order = ds;
  q.service_order = dt;

  q.boundary_local = MatrixXd::Zero(d0, d0);
  fill_diagonal(q.boundary_local, S - lambda * Is, b);
  for (int r = 0; r + 1 < b; ++r) q.boundary_local.block(r * ds, (r + 1) * ds, ds, ds) += lambda * Is;

  q.boundary_up = MatrixXd::Zero(d0, d);
  fill_diagonal(q.boundary_up, kron(s_restart, alpha), b);
  q.boundary_up_arrival = MatrixXd::Zero(d0, d);
  q.boundary_up_arrival.block((b - 1) * ds, 0, ds, ds * dt) = lambda * kron(Is, alpha);
  q.boundary_up += q.boundary_up_arrival;

  q.first_down = MatrixXd::Zero(d, d0);
  fill_diagonal(q.first_down, kron(Is, t_exit), b);

  const MatrixXd ksum = kron(S, It) + kron(Is, T);
  q.local = MatrixXd::Zero(d, d);
  fill_diagonal(q.local, ksum - lambda * Ids, b);
  for (int r = 0; r + 1 < b; ++r) {
    q.local.block(r * ds * dt, (r + 1) * ds * dt, ds * dt, ds * dt) += lambda * Ids;
  }

  q.up = MatrixXd::Zero(d, d);
  fill_diagonal(q.up, kron(s_restart, It), b);
  q.up_arrival = MatrixXd::Zero(d, d);
  q.up_arrival.block((b - 1) * ds * dt, 0, ds * dt, ds * dt) = lambda * Ids;
  q.up += q.up_arrival;

  q.down = MatrixXd::Zero(d, d);
  fill_diagonal(q.down, kron(Is, t_restart), b);
  return q;
}

Eigen::RowVectorXd renewal_stationary(const PhaseTypeRep& ph) {
  SparseMatrix g = ph.subgenerator().matrix();
  SparseMatrix restart = (ph.exit() * ph.initial().transpose()).sparseView();
  g += restart;
  g.makeCompressed();

  // Phases never entered from the initial support can hold closed classes of their own
  // (censored states of an improper law); restrict to the reachable part.
  const Eigen::Index d = g.rows();
  std::vector<Eigen::Index> local(d, -1);
  std::vector<Eigen::Index> order;
  for (Eigen::Index r = 0; r < d; ++r) {
    if (ph.initial()[r] > 0.0) {
      local[r] = static_cast<Eigen::Index>(order.size());
      order.push_back(r);
    }
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (SparseMatrix::InnerIterator it(g, order[head]); it; ++it) {
      if (it.value() > 0.0 && local[it.col()] < 0) {
        local[it.col()] = static_cast<Eigen::Index>(order.size());
        order.push_back(it.col());
      }
    }
  }
  if (static_cast<Eigen::Index>(order.size()) == d) return sparse_stationary(g);

  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index r : order) {
    for (SparseMatrix::InnerIterator it(g, r); it; ++it) {
      if (local[it.col()] >= 0) t.emplace_back(local[r], local[it.col()], it.value());
    }
  }
  SparseMatrix sub(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(order.size()));
  sub.setFromTriplets(t.begin(), t.end());
  const Eigen::RowVectorXd part = sparse_stationary(sub);
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(d);
  for (std::size_t i = 0; i < order.size(); ++i) out[order[i]] = part[static_cast<Eigen::Index>(i)];
  return out;
}

StabilityVerdict stability_check(const PhaseTypeRep& ext_block, const PhaseTypeRep& ext_orphan,
                                 double lambda, int b) {
  if (!ext_block.is_proper()) {
    throw NumericalError("block-generation law is improper; the service process never completes");
  }
  const Eigen::RowVectorXd delta_t = renewal_stationary(ext_block);
  const Eigen::RowVectorXd delta_s = renewal_stationary(ext_orphan);
  StabilityVerdict v;
  v.up_drift = lambda + b * delta_s.dot(ext_orphan.exit());
  v.down_drift = b * delta_t.dot(ext_block.exit());
  v.stable = v.up_drift < v.down_drift;
  if (delta_t.size() == ext_orphan.exit().size()) {
    v.swapped_up_drift = lambda + b * delta_t.dot(ext_orphan.exit());
    v.swapped_down_drift = b * delta_s.dot(ext_block.exit());
  } else {
    v.swapped_up_drift = std::nan("");
    v.swapped_down_drift = std::nan("");
  }
  return v;
}

RateMatrix solve_rate_matrix(const QbdBlocks& q, const RateIterationOptions& opt) {
  if (!(opt.eps > 0.0)) throw ValidationError("eps", "eps must be positive");
  const Eigen::Index d = q.level_dim();

  Eigen::PartialPivLU<MatrixXd> lu(-q.local);
  MatrixXd M = lu.inverse();
  if (!M.allFinite()) throw NumericalError("the local level block is singular");

  // Only the columns where `down` restarts the service phase are non-zero.
  std::vector<Eigen::Index> cols;
  for (Eigen::Index c = 0; c < d; ++c) {
    if ((q.down.col(c).array() != 0.0).any()) cols.push_back(c);
  }
  const auto nc = static_cast<Eigen::Index>(cols.size());
  MatrixXd down_c(d, nc);
  MatrixXd w(nc, d);
  for (Eigen::Index c = 0; c < nc; ++c) {
    down_c.col(c) = q.down.col(cols[c]);
    w.row(c) = M.row(cols[c]);
  }
  const MatrixXd up_m = q.up * M;

  RateMatrix out;
  MatrixXd R = MatrixXd::Zero(d, d);
  MatrixXd next(d, d);
  for (long it = 1; it <= opt.max_iter; ++it) {
    const MatrixXd v = R * down_c;
    const MatrixXd rv = R * v;
    next.noalias() = rv * w;
    next += up_m;
    const double step = inf_norm(next - R);
    R.swap(next);
    if (opt.observer) opt.observer(it, R);
    out.iterations = it;
    out.last_step = step;
    if (step < opt.eps) break;
    if (it == opt.max_iter) {
      out.residual = inf_norm(R * R * q.down + R * q.local + q.up);
      throw NumericalError("rate matrix iteration did not converge in " +
                           std::to_string(opt.max_iter) + " steps (last step " +
                           std::to_string(step) + ", residual " + std::to_string(out.residual) + ")");
    }
  }
  out.residual = inf_norm(R * R * q.down + R * q.local + q.up);
  out.R = std::move(R);
  return out;
}

Eigen::RowVectorXd StationaryQbd::tail_mass() const {
  const Eigen::Index d = R.rows();
  const MatrixXd a = MatrixXd::Identity(d, d) - R;
  return a.transpose().partialPivLu().solve(level1.transpose()).transpose();
}

double StationaryQbd::total_mass() const { return level0.sum() + tail_mass().sum(); }

Eigen::RowVectorXd StationaryQbd::level(std::size_t k) const {
  if (k == 0) return level0;
  Eigen::RowVectorXd v = level1;
  for (std::size_t i = 1; i < k; ++i) v = v * R;
  return v;
}

StationaryQbd solve_boundary(const QbdBlocks& q, const MatrixXd& R) {
  const Eigen::Index d0 = q.boundary_dim();
  const Eigen::Index d = q.level_dim();
  if (R.rows() != d || R.cols() != d) throw ValidationError("R", "rate matrix has wrong size");

  // [psi0 psi1] * G = 0 with G = [[boundary_local, boundary_up], [first_down, local + R down]].
  MatrixXd G(d0 + d, d0 + d);
  G.topLeftCorner(d0, d0) = q.boundary_local;
  G.topRightCorner(d0, d) = q.boundary_up;
  G.bottomLeftCorner(d, d0) = q.first_down;
  G.bottomRightCorner(d, d) = q.local + R * q.down;

  const MatrixXd I = MatrixXd::Identity(d, d);
  const VectorXd tail = (I - R).partialPivLu().solve(VectorXd::Ones(d));

  MatrixXd sys = G.transpose();
  sys.row(d0 + d - 1).head(d0).setOnes();
  sys.row(d0 + d - 1).tail(d) = tail.transpose();
  VectorXd rhs = VectorXd::Zero(d0 + d);
  rhs[d0 + d - 1] = 1.0;

  Eigen::FullPivLU<MatrixXd> lu(sys);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) {
    throw NumericalError("boundary system has rank " + std::to_string(lu.rank()) + " of " +
                         std::to_string(d0 + d) + "; the stationary vector is not unique");
  }
  const VectorXd x = lu.solve(rhs);
  StationaryQbd s;
  s.level0 = x.head(d0).transpose().cwiseMax(0.0);
  s.level1 = x.tail(d).transpose().cwiseMax(0.0);
  s.R = R;
  return s;
}

EventRates stationary_event_rates(const StationaryQbd& s, const QbdBlocks& q) {
  const Eigen::RowVectorXd tail = s.tail_mass();
  EventRates e;
  e.block = tail.dot(q.down.rowwise().sum());
  const VectorXd orphan0 = (q.boundary_up - q.boundary_up_arrival).rowwise().sum();
  const VectorXd orphan = (q.up - q.up_arrival).rowwise().sum();
  e.orphan = s.level0.dot(orphan0) + tail.dot(orphan);
  return e;
}

double balance_residual(const StationaryQbd& s, const QbdBlocks& q, std::size_t levels) {
  std::vector<Eigen::RowVectorXd> psi;
  psi.push_back(s.level0);
  Eigen::RowVectorXd v = s.level1;
  for (std::size_t k = 1; k <= levels; ++k) {
    psi.push_back(v);
    v = v * s.R;
  }
  double worst = 0.0;
  worst = std::max(worst, (psi[0] * q.boundary_local + psi[1] * q.first_down).cwiseAbs().maxCoeff());
  for (std::size_t k = 1; k < levels; ++k) {
    Eigen::RowVectorXd r = psi[k] * q.local + psi[k + 1] * q.down;
    r += k == 1 ? Eigen::RowVectorXd(psi[0] * q.boundary_up) : Eigen::RowVectorXd(psi[k - 1] * q.up);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace pbftrel

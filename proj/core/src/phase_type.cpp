#include "pbftrel/phase_type.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "pbftrel/block_inverse.hpp"
#include "pbftrel/errors.hpp"
#include "pbftrel/linalg.hpp"

namespace pbftrel {

PhaseTypeRep::PhaseTypeRep(Eigen::VectorXd initial, SparseGenerator subgenerator,
                           Eigen::VectorXd exit, std::optional<BlockPartition> partition,
                           bool defective_initial)
    : initial_(std::move(initial)), subgen_(std::move(subgenerator)), exit_(std::move(exit)),
      partition_(std::move(partition)) {
  AbsorbingChain view{initial_, subgen_, exit_, std::nullopt};
  if (defective_initial) {
    if ((initial_.array() < 0.0).any() || initial_.sum() > 1.0 + 1e-12) {
      throw ValidationError("initial", "defective initial vector must be sub-stochastic");
    }
    view.initial = Eigen::VectorXd::Zero(initial_.size());
    if (view.initial.size() > 0) view.initial[0] = 1.0;
  }
  check_absorbing(view);
  if (partition_ && partition_->size() != static_cast<std::size_t>(initial_.size())) {
    throw ValidationError("partition", "partition size does not match the phase count");
  }
}

PhaseTypeRep::PhaseTypeRep(const AbsorbingChain& chain)
    : PhaseTypeRep(chain.initial, chain.subgenerator, chain.exit, chain.partition) {}

PhaseTypeRep PhaseTypeRep::exponential(double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw ValidationError("rate", "exponential rate must be finite and non-negative");
  }
  SparseMatrix m(1, 1);
  m.insert(0, 0) = -rate;
  BlockPartition p;
  p.append_level(1);
  return PhaseTypeRep(Eigen::VectorXd::Ones(1), SparseGenerator(std::move(m),
                      Conservativity::sub_conservative), Eigen::VectorXd::Constant(1, rate), p);
}

bool PhaseTypeRep::is_proper() const {
  const auto& m = subgen_.matrix();
  const Eigen::Index d = m.rows();
  // Reverse reachability from exit phases.
  std::vector<std::vector<Eigen::Index>> preds(d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() != r && it.value() > 0.0) preds[it.col()].push_back(r);
    }
  }
  std::vector<char> reaches(d, 0);
  std::deque<Eigen::Index> todo;
  for (Eigen::Index r = 0; r < d; ++r) {
    if (exit_[r] > 0.0) {
      reaches[r] = 1;
      todo.push_back(r);
    }
  }
  while (!todo.empty()) {
    const auto c = todo.front();
    todo.pop_front();
    for (auto r : preds[c]) {
      if (!reaches[r]) {
        reaches[r] = 1;
        todo.push_back(r);
      }
    }
  }
  // Forward reachability from the initial support.
  std::vector<char> seen(d, 0);
  for (Eigen::Index r = 0; r < d; ++r) {
    if (initial_[r] > 0.0) {
      seen[r] = 1;
      todo.push_back(r);
    }
  }
  while (!todo.empty()) {
    const auto r = todo.front();
    todo.pop_front();
    if (!reaches[r]) return false;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() != r && it.value() > 0.0 && !seen[it.col()]) {
        seen[it.col()] = 1;
        todo.push_back(it.col());
      }
    }
  }
  return true;
}

namespace {

// Normalized Poisson(x) weights on [left, left + w.size()), with dropped mass < tol.
struct PoissonWindow {
  std::size_t left = 0;
  std::vector<double> w;
};

PoissonWindow poisson_window(double x, double tol) {
  PoissonWindow out;
  if (x == 0.0) {
    out.w = {1.0};
    return out;
  }
  const auto mode = static_cast<std::size_t>(std::floor(x));
  // Unnormalized weights relative to the mode; the sum is renormalized at the end.
  std::vector<double> right{1.0};
  double total = 1.0;
  for (std::size_t k = mode + 1;; ++k) {
    const double next = right.back() * x / static_cast<double>(k);
    right.push_back(next);
    total += next;
    const double ratio = x / static_cast<double>(k + 1);
    if (ratio < 1.0 && next / (1.0 - ratio) < 0.25 * tol * total) break;
  }
  std::vector<double> left;
  for (std::size_t k = mode; k > 0; --k) {
    const double next = (left.empty() ? 1.0 : left.back()) * static_cast<double>(k) / x;
    left.push_back(next);
    total += next;
    const double ratio = static_cast<double>(k - 1) / x;
    if (ratio < 1.0 && next / (1.0 - ratio) < 0.25 * tol * total) break;
  }
  out.left = mode - left.size();
  out.w.assign(left.rbegin(), left.rend());
  out.w.insert(out.w.end(), right.begin(), right.end());
  for (double& v : out.w) v /= total;
  return out;
}

// Λ t above which a step is refused.
constexpr double kMaxUniformizationWork = 5e7;

}  // namespace

Eigen::RowVectorXd transient_distribution(const SparseMatrix& generator,
                                          const Eigen::RowVectorXd& start, double t, double tol) {
  if (t < 0.0) throw ValidationError("t", "time must be non-negative");
  if (!(tol > 0.0)) throw ValidationError("tol", "tolerance must be positive");
  const Eigen::Index d = generator.rows();
  double rate = 0.0;
  for (Eigen::Index r = 0; r < d; ++r) rate = std::max(rate, -generator.coeff(r, r));
  if (t == 0.0 || rate == 0.0) return start;
  if (rate * t > kMaxUniformizationWork) {
    throw NumericalError("uniformization work rate*t = " + std::to_string(rate * t) +
                         " exceeds the step budget");
  }

  SparseMatrix step(d, d);
  step.setIdentity();
  step += generator / rate;
  const PoissonWindow win = poisson_window(rate * t, tol);

  Eigen::RowVectorXd v = start;
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(d);
  const std::size_t last = win.left + win.w.size();
  for (std::size_t k = 0; k < last; ++k) {
    if (k >= win.left) acc += win.w[k - win.left] * v;
    if (k + 1 < last) v = v * step;
  }
  return acc;
}

std::vector<Eigen::RowVectorXd> transient_path(const SparseMatrix& generator,
                                               const Eigen::RowVectorXd& start,
                                               std::span<const double> times, double tol) {
  std::vector<Eigen::RowVectorXd> out;
  out.reserve(times.size());
  Eigen::RowVectorXd cur = start;
  double now = 0.0;
  for (double t : times) {
    if (t < now) throw ValidationError("grid", "time grid must be non-decreasing and start >= 0");
    cur = transient_distribution(generator, cur, t - now, tol);
    now = t;
    out.push_back(cur);
  }
  return out;
}

double ph_cdf(const PhaseTypeRep& ph, double t, double tol) {
  const double tt[] = {t};
  return ph_cdf(ph, tt, tol).front();
}

std::vector<double> ph_cdf(const PhaseTypeRep& ph, std::span<const double> times, double tol) {
  const auto path =
      transient_path(ph.subgenerator().matrix(), ph.initial().transpose(), times, tol);
  std::vector<double> out;
  out.reserve(path.size());
  const double mass = ph.initial().sum();
  for (const auto& v : path) out.push_back(std::clamp(mass - v.sum(), 0.0, 1.0));
  return out;
}

namespace {

void require_proper(const PhaseTypeRep& ph) {
  if (!ph.is_proper()) {
    throw NumericalError("improper distribution: absorption is not reachable from every visited "
                         "phase, so the subgenerator is singular and the mean is infinite");
  }
}

}  // namespace

Eigen::RowVectorXd occupation_times(const PhaseTypeRep& ph) {
  require_proper(ph);
  SparseMatrix at = -SparseMatrix(ph.subgenerator().matrix().transpose());
  return sparse_solve(at, ph.initial()).transpose();
}

double ph_mean(const PhaseTypeRep& ph) {
  require_proper(ph);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ph.order());
  const Eigen::VectorXd x = sparse_solve(-ph.subgenerator().matrix(), ones);
  return ph.initial().dot(x);
}

double ph_mean_structured(const PhaseTypeRep& ph) {
  if (!ph.partition()) {
    throw ValidationError("partition", "phase-type representation has no block partition");
  }
  require_proper(ph);
  const BlockBidiagonalSolver solver(-ph.subgenerator().matrix(), *ph.partition());
  return ph.initial().dot(solver.solve(Eigen::VectorXd::Ones(ph.order())));
}

PhaseTypeRep trim_unreachable(const PhaseTypeRep& ph) {
  const auto& m = ph.subgenerator().matrix();
  const Eigen::Index d = ph.order();
  std::vector<Eigen::Index> local(d, -1);
  std::vector<Eigen::Index> order;
  for (Eigen::Index r = 0; r < d; ++r) {
    if (ph.initial()[r] > 0.0) {
      local[r] = static_cast<Eigen::Index>(order.size());
      order.push_back(r);
    }
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (SparseMatrix::InnerIterator it(m, order[head]); it; ++it) {
      if (it.col() != order[head] && it.value() > 0.0 && local[it.col()] < 0) {
        local[it.col()] = static_cast<Eigen::Index>(order.size());
        order.push_back(it.col());
      }
    }
  }
  const auto k = static_cast<Eigen::Index>(order.size());
  if (k == d) return ph;
  std::vector<Eigen::Triplet<double>> t;
  Eigen::VectorXd init(k), exit(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index r = order[i];
    init[i] = ph.initial()[r];
    exit[i] = ph.exit()[r];
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (local[it.col()] >= 0) t.emplace_back(i, local[it.col()], it.value());
    }
  }
  SparseMatrix sub(k, k);
  sub.setFromTriplets(t.begin(), t.end());
  return PhaseTypeRep(std::move(init), SparseGenerator(std::move(sub), Conservativity::sub_conservative),
                      std::move(exit), std::nullopt);
}

double ph_sample(const PhaseTypeRep& ph, RandomStream& rng) {
  const auto& m = ph.subgenerator().matrix();
  const auto& init = ph.initial();
  double u = rng.uniform() * init.sum();
  Eigen::Index cur = 0;
  for (Eigen::Index r = 0; r < init.size(); ++r) {
    cur = r;
    if (u < init[r]) break;
    u -= init[r];
  }
  double t = 0.0;
  for (;;) {
    const double out = -m.coeff(cur, cur);
    if (!(out > 0.0)) return std::numeric_limits<double>::infinity();
    t += rng.exponential(out);
    double pick = rng.uniform() * out;
    if (pick < ph.exit()[cur]) return t;
    pick -= ph.exit()[cur];
    Eigen::Index next = -1;
    for (SparseMatrix::InnerIterator it(m, cur); it; ++it) {
      if (it.col() == cur) continue;
      next = it.col();
      if (pick < it.value()) break;
      pick -= it.value();
    }
    if (next < 0) return t;  // rounding: all mass was on the exit
    cur = next;
  }
}

}  // namespace pbftrel

#include "pbftrel/reliability.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <limits>

#include "pbftrel/block_inverse.hpp"
#include "pbftrel/errors.hpp"
#include "pbftrel/generators.hpp"
#include "pbftrel/linalg.hpp"

namespace pbftrel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniformization steps allowed before switching to a dense exponential.
constexpr double kUniformizationBudget = 2e7;
constexpr Eigen::Index kDenseExpLimit = 2000;

}  // namespace

InherentAvailability availability_inherent(const SystemParams& s) {
  check_params(s);
  const int N = s.total_nodes();
  InherentAvailability out;
  out.zeta = Eigen::VectorXd::Zero(N + 1);
  if (s.theta == 0.0) {
    out.zeta[0] = 1.0;
  } else if (s.mu == 0.0) {
    out.zeta[N] = 1.0;
  } else {
    // Scale by the running maximum to stay in range for large N or rho.
    out.zeta[0] = 1.0;
    for (int k = 1; k <= N; ++k) {
      out.zeta[k] = (N - k + 1) * s.theta / (k * s.mu) * out.zeta[k - 1];
      if (out.zeta[k] > 1e200) out.zeta.head(k + 1) /= out.zeta[k];
    }
    out.zeta /= out.zeta.sum();
  }
  out.a1 = out.zeta.head(s.n + 1).sum();
  out.unavailability = out.zeta.tail(N - s.n).sum();
  return out;
}

double availability_inherent_closed_form(const SystemParams& s) {
  check_params(s);
  if (s.theta == 0.0) return 1.0;
  if (s.mu == 0.0) return 0.0;
  const int N = s.total_nodes();
  const double log_rho = std::log(s.theta / s.mu);
  std::vector<double> log_terms(N + 1);
  for (int k = 0; k <= N; ++k) {
    log_terms[k] = std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0) +
                   k * log_rho;
  }
  const double top = *std::max_element(log_terms.begin(), log_terms.end());
  double num = 0.0, den = 0.0;
  for (int k = 0; k <= N; ++k) {
    const double t = std::exp(log_terms[k] - top);
    den += t;
    if (k <= s.n) num += t;
  }
  return num / den;
}

std::vector<double> default_time_grid(double mttff, std::size_t points) {
  const double span = std::isfinite(mttff) && mttff > 0.0 ? 10.0 * mttff : 10.0;
  std::vector<double> grid{0.0};
  if (points < 2) return grid;
  const double first = span * 1e-4;
  const std::size_t rest = points - 1;
  for (std::size_t i = 0; i < rest; ++i) {
    const double f = rest == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(rest - 1);
    grid.push_back(first * std::pow(span / first, f));
  }
  return grid;
}

ReliabilityCurve survival_curve(const SparseMatrix& sub, const Eigen::RowVectorXd& start,
                                std::span<const double> grid, double tol) {
  ReliabilityCurve c;
  if (grid.empty()) return c;
  if (grid.front() != 0.0) throw ValidationError("grid", "time grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ValidationError("grid", "time grid must be strictly increasing");
  }
  c.t.assign(grid.begin(), grid.end());

  double rate = 0.0;
  for (Eigen::Index r = 0; r < sub.rows(); ++r) rate = std::max(rate, -sub.coeff(r, r));
  const double work = rate * grid.back();

  std::vector<double> raw;
  if (work <= kUniformizationBudget) {
    for (const auto& v : transient_path(sub, start, grid, tol)) raw.push_back(v.sum());
  } else if (sub.rows() <= kDenseExpLimit) {
    // Long horizons: step with dense exponentials of each grid increment.
    const Eigen::MatrixXd dense(sub);
    Eigen::RowVectorXd cur = start;
    double now = 0.0;
    for (double t : grid) {
      if (t > now) {
        const Eigen::MatrixXd step = (dense * (t - now)).exp();
        cur = cur * step;
        now = t;
      }
      raw.push_back(cur.sum());
    }
  } else {
    throw NumericalError("survival curve needs rate*t = " + std::to_string(work) +
                         " uniformization steps on " + std::to_string(sub.rows()) +
                         " states; shorten the grid");
  }
  // Round-off below tol can break monotonicity; keep the curve in [0,1] and non-increasing.
  double floor_value = 1.0;
  for (double v : raw) {
    floor_value = std::min(floor_value, std::clamp(v, 0.0, 1.0));
    c.value.push_back(floor_value);
  }
  return c;
}

namespace {

ReliabilityResult absorbing_reliability(const AbsorbingChain& chain,
                                        std::span<const double> grid, double tol) {
  const PhaseTypeRep ph(chain);
  ReliabilityResult out;
  out.mttff = ph.is_proper() ? ph_mean(ph) : kInf;
  std::vector<double> own;
  if (grid.empty()) {
    own = default_time_grid(out.mttff);
    grid = own;
  }
  if ((chain.exit.array() == 0.0).all()) {
    // No absorbing transition at all: survival is exactly one.
    out.curve.t.assign(grid.begin(), grid.end());
    out.curve.value.assign(grid.size(), 1.0);
    return out;
  }
  out.curve = survival_curve(chain.subgenerator.matrix(), chain.initial.transpose(), grid, tol);
  return out;
}

}  // namespace

ReliabilityResult reliability_inherent(const SystemParams& params, std::span<const double> grid,
                                       double tol) {
  return absorbing_reliability(build_inherent_absorbing(params), grid, tol);
}

ReliabilityResult reliability_operational(const SystemParams& params,
                                          std::span<const double> grid, double tol) {
  return absorbing_reliability(build_operational_absorbing(params), grid, tol);
}

FullCycleStationary::FullCycleStationary(StateIndexer space, Eigen::RowVectorXd pi)
    : space_(std::move(space)), pi_(std::move(pi)) {}

Eigen::RowVectorXd FullCycleStationary::level(int k) const {
  return pi_.segment(static_cast<Eigen::Index>(space_.level_begin(k)),
                     static_cast<Eigen::Index>(space_.level_size(k)));
}

namespace {

struct LevelBlocks {
  StateIndexer space;
  SparseMatrix q;
  int top = 0;  // last level index, 2n+1

  LevelBlocks(const SystemParams& s)
      : space(s.n, SpaceKind::full_cycle), q(build_full_cycle_Q(s).matrix()), top(2 * s.n + 1) {}

  Eigen::Index begin(int k) const { return static_cast<Eigen::Index>(space.level_begin(k)); }
  Eigen::Index size(int k) const { return static_cast<Eigen::Index>(space.level_size(k)); }

  SparseMatrix block(int from, int to) const {
    return SparseMatrix(q.block(begin(from), begin(to), size(from), size(to)));
  }
  BlockPartition partition(int k) const {
    BlockPartition p;
    p.level_offsets = {0, static_cast<std::size_t>(size(k))};
    p.group_offsets = {space.partition().group_offsets[k]};
    return p;
  }
  // -Q_{k,k} as a structured solver.
  BlockBidiagonalSolver solver(int k) const { return BlockBidiagonalSolver(-block(k, k), partition(k)); }
};

// Each level may only reach itself, the next level, or the origin state.
void check_level_pattern(const LevelBlocks& lb) {
  const auto& sp = lb.space;
  for (Eigen::Index r = 0; r < lb.q.outerSize(); ++r) {
    const int k = sp.state_of(r).k;
    for (SparseMatrix::InnerIterator it(lb.q, r); it; ++it) {
      const int kc = sp.state_of(it.col()).k;
      if (kc == k || kc == k + 1 || it.col() == 0) continue;
      throw NumericalError("full-cycle generator has an unexpected level transition");
    }
  }
}

}  // namespace

FullCycleStationary stationary_pi(const SystemParams& params) {
  const LevelBlocks lb(params);
  check_level_pattern(lb);
  const int top = lb.top;

  std::vector<BlockBidiagonalSolver> solvers;
  solvers.reserve(top);
  for (int k = 1; k <= top; ++k) solvers.push_back(lb.solver(k));
  const auto solver = [&](int k) -> const BlockBidiagonalSolver& { return solvers[k - 1]; };

  // Returns to the origin from levels >= 1, folded back to level 0:
  // c = sum_{k>=1} R_0 ... R_{k-1} Q_{k,0} e_0, accumulated from the top level down.
  const auto origin_column = [&](int k) {
    return Eigen::VectorXd(lb.q.block(lb.begin(k), 0, lb.size(k), 1));
  };
  Eigen::VectorXd w = origin_column(top);
  for (int k = top - 1; k >= 1; --k) {
    w = origin_column(k) + lb.block(k, k + 1) * solver(k + 1).solve(w);
  }
  const Eigen::VectorXd c = lb.block(0, 1) * solver(1).solve(w);

  Eigen::MatrixXd censored(lb.block(0, 0));
  censored.col(0) += c;
  const Eigen::RowVectorXd pi0 = gth_stationary(censored);

  Eigen::RowVectorXd pi(lb.space.size());
  pi.segment(0, lb.size(0)) = pi0;
  Eigen::RowVectorXd cur = pi0;
  for (int k = 0; k < top; ++k) {
    cur = solver(k + 1).solve_left(cur * lb.block(k, k + 1));
    pi.segment(lb.begin(k + 1), lb.size(k + 1)) = cur;
  }
  pi /= pi.sum();
  return FullCycleStationary(lb.space, std::move(pi));
}

std::vector<Eigen::MatrixXd> level_rate_matrices(const SystemParams& params) {
  const LevelBlocks lb(params);
  std::vector<Eigen::MatrixXd> out;
  for (int k = 0; k < lb.top; ++k) {
    out.push_back(lb.block(k, k + 1) * lb.solver(k + 1).inverse());
  }
  return out;
}

FullAvailability availability_full(const FullCycleStationary& st, const SystemParams& params) {
  const int n = params.n;
  if (st.space().n() != n) throw ValidationError("n", "stationary vector belongs to another n");
  FullAvailability out;
  for (int k = 0; k <= 2 * n; ++k) {
    out.unavailability += st.probability({k, 0, n + 1});
    for (int i = 0; i <= n + 1; ++i) out.p_o += st.probability({k, i, n + 1 - i});
  }
  out.a2 = 1.0 - out.unavailability;
  out.a3 = 1.0 - out.p_o;
  return out;
}

}  // namespace pbftrel

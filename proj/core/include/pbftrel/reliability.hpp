#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "pbftrel/params.hpp"
#include "pbftrel/phase_type.hpp"
#include "pbftrel/state_space.hpp"

namespace pbftrel {

struct ReliabilityCurve {
  std::vector<double> t;      // strictly increasing, t[0] = 0
  std::vector<double> value;  // in [0,1], non-increasing
};

struct InherentAvailability {
  Eigen::VectorXd zeta;        // stationary law of the failed-node count
  double a1 = 1.0;             // P{at most n failed}
  double unavailability = 0.0;  // P{more than n failed}, summed directly
};

// zeta by the ratio recursion; for mu = 0 the chain is absorbed in "all failed" (theta > 0)
// or never leaves "none failed" (theta = 0).
InherentAvailability availability_inherent(const SystemParams& params);

// A1 from the binomial ratio sum_{k<=n} C(N,k) rho^k / sum_{k<=N} C(N,k) rho^k, rho = theta/mu.
double availability_inherent_closed_form(const SystemParams& params);

struct ReliabilityResult {
  ReliabilityCurve curve;
  double mttff = 0.0;  // +infinity when the failure set is unreachable
};

// 0 followed by points-1 geometric points up to 10 * mttff (or up to 10 time units when
// mttff is infinite).
std::vector<double> default_time_grid(double mttff, std::size_t points = 200);

// An empty grid selects default_time_grid.
ReliabilityResult reliability_inherent(const SystemParams& params,
                                       std::span<const double> grid = {},
                                       double tol = kDefaultUniformizationTol);
ReliabilityResult reliability_operational(const SystemParams& params,
                                          std::span<const double> grid = {},
                                          double tol = kDefaultUniformizationTol);

// Survival curve sum(phi(0) exp(sub t)) on a grid.
ReliabilityCurve survival_curve(const SparseMatrix& subgenerator, const Eigen::RowVectorXd& start,
                                std::span<const double> grid, double tol);

class FullCycleStationary {
 public:
  FullCycleStationary(StateIndexer space, Eigen::RowVectorXd pi);

  const StateIndexer& space() const noexcept { return space_; }
  const Eigen::RowVectorXd& pi() const noexcept { return pi_; }
  double probability(const VotingState& s) const { return pi_[space_.index_of(s)]; }
  Eigen::RowVectorXd level(int k) const;

 private:
  StateIndexer space_;
  Eigen::RowVectorXd pi_;
};

// Level-by-level product form: the level-0 vector solves a censored balance system by
// GTH elimination and each higher level follows from
//   pi_{k+1} = pi_k Q_{k,k+1} (-Q_{k+1,k+1})^{-1}
// with structured solves over the diagonal level blocks.
FullCycleStationary stationary_pi(const SystemParams& params);

// Explicit rate matrices Q_{k,k+1} (-Q_{k+1,k+1})^{-1}, k = 0..2n.
std::vector<Eigen::MatrixXd> level_rate_matrices(const SystemParams& params);

struct FullAvailability {
  double a2 = 1.0;
  double p_o = 0.0;               // stationary probability of an orphan state
  double a3 = 1.0;
  double unavailability = 0.0;    // sum over k of pi(k, 0, n+1)
};

FullAvailability availability_full(const FullCycleStationary& stationary,
                                   const SystemParams& params);

}  // namespace pbftrel

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>

#include "pbftrel/phase_type.hpp"

namespace pbftrel {

inline constexpr std::size_t kDefaultDimensionCap = 20000;

// Level-independent QBD for the transaction queue. A level counts full groups of b
// transactions; within a level the phase is (remainder r, orphan phase, service phase) in
// that Kronecker order, the service factor being absent on level 0.
struct QbdBlocks {
  Eigen::MatrixXd boundary_local;  // level 0 -> 0
  Eigen::MatrixXd boundary_up;     // level 0 -> 1
  Eigen::MatrixXd first_down;      // level 1 -> 0
  Eigen::MatrixXd up;              // level k -> k+1
  Eigen::MatrixXd local;           // level k -> k, k >= 1
  Eigen::MatrixXd down;            // level k -> k-1, k >= 2
  // Arrival-driven parts of the two up blocks; the remainder is orphan rollback.
  Eigen::MatrixXd boundary_up_arrival;
  Eigen::MatrixXd up_arrival;

  int b = 1;
  double lambda = 0.0;
  Eigen::Index orphan_order = 0;   // phases of the extended orphan law
  Eigen::Index service_order = 0;  // phases of the extended block law

  Eigen::Index boundary_dim() const { return boundary_local.rows(); }
  Eigen::Index level_dim() const { return local.rows(); }
};

// Refuses per-level dimensions above `cap` with DimensionError.
QbdBlocks build_qbd_blocks(const PhaseTypeRep& ext_block, const PhaseTypeRep& ext_orphan,
                           double lambda, int b, std::size_t cap = kDefaultDimensionCap);

struct StabilityVerdict {
  double up_drift = 0.0;    // lambda + b * orphan event rate
  double down_drift = 0.0;  // b * block event rate
  bool stable = false;
  // Same drifts with the two stationary phase vectors exchanged.
  double swapped_up_drift = 0.0;
  double swapped_down_drift = 0.0;
};

// Stationary vector of (generator + exit * initial) for a proper PH law.
Eigen::RowVectorXd renewal_stationary(const PhaseTypeRep& ph);

StabilityVerdict stability_check(const PhaseTypeRep& ext_block, const PhaseTypeRep& ext_orphan,
                                 double lambda, int b);

struct RateIterationOptions {
  double eps = 1e-10;
  long max_iter = 100000;
  // Called with (iteration, iterate) after each step when set.
  std::function<void(long, const Eigen::MatrixXd&)> observer;
};

struct RateMatrix {
  Eigen::MatrixXd R;
  long iterations = 0;
  double last_step = 0.0;  // sup-norm of the final increment
  double residual = 0.0;   // sup-norm of R^2 down + R local + up
};

// Fixed-point iteration R <- (R^2 down + up) (-local)^{-1} from R = 0.
RateMatrix solve_rate_matrix(const QbdBlocks& blocks, const RateIterationOptions& options = {});

struct StationaryQbd {
  Eigen::RowVectorXd level0;
  Eigen::RowVectorXd level1;
  Eigen::MatrixXd R;

  // level1 * (I - R)^{-1}: summed mass of all levels >= 1, per phase.
  Eigen::RowVectorXd tail_mass() const;
  double total_mass() const;
  // Vector of level k (k >= 0).
  Eigen::RowVectorXd level(std::size_t k) const;
};

StationaryQbd solve_boundary(const QbdBlocks& blocks, const Eigen::MatrixXd& R);

struct EventRates {
  double block = 0.0;   // long-run blocks per unit time
  double orphan = 0.0;  // long-run orphan rollbacks per unit time
};

EventRates stationary_event_rates(const StationaryQbd& stationary, const QbdBlocks& blocks);

// Sup-norm residual of the balance equations on levels 0..levels-1 of the truncated
// solution (the last level is checked only against its known neighbours).
double balance_residual(const StationaryQbd& stationary, const QbdBlocks& blocks,
                        std::size_t levels);

}  // namespace pbftrel

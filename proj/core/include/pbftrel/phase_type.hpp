#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "pbftrel/random.hpp"
#include "pbftrel/sparse_generator.hpp"

namespace pbftrel {

class PhaseTypeRep {
 public:
  // Validates the triple. `defective_initial` allows an initial vector summing below one.
  PhaseTypeRep(Eigen::VectorXd initial, SparseGenerator subgenerator, Eigen::VectorXd exit,
               std::optional<BlockPartition> partition = std::nullopt,
               bool defective_initial = false);
  explicit PhaseTypeRep(const AbsorbingChain& chain);

  // Single phase; rate 0 gives the law that never absorbs.
  static PhaseTypeRep exponential(double rate);

  Eigen::Index order() const noexcept { return initial_.size(); }
  const Eigen::VectorXd& initial() const noexcept { return initial_; }
  const SparseGenerator& subgenerator() const noexcept { return subgen_; }
  const Eigen::VectorXd& exit() const noexcept { return exit_; }
  const std::optional<BlockPartition>& partition() const noexcept { return partition_; }

  // True when absorption is certain from every phase the chain can visit.
  bool is_proper() const;

 private:
  Eigen::VectorXd initial_;
  SparseGenerator subgen_;
  Eigen::VectorXd exit_;
  std::optional<BlockPartition> partition_;
};

inline constexpr double kDefaultUniformizationTol = 1e-12;

// phi(0) exp(Q t) for a (sub)generator by uniformization; the Poisson tail dropped has
// mass below `tol`.
Eigen::RowVectorXd transient_distribution(const SparseMatrix& generator,
                                          const Eigen::RowVectorXd& start, double t,
                                          double tol = kDefaultUniformizationTol);

// Same, evaluated along an increasing grid by stepping from point to point.
std::vector<Eigen::RowVectorXd> transient_path(const SparseMatrix& generator,
                                               const Eigen::RowVectorXd& start,
                                               std::span<const double> times,
                                               double tol = kDefaultUniformizationTol);

double ph_cdf(const PhaseTypeRep& ph, double t, double tol = kDefaultUniformizationTol);
// CDF on an increasing grid.
std::vector<double> ph_cdf(const PhaseTypeRep& ph, std::span<const double> times,
                           double tol = kDefaultUniformizationTol);

// -initial * subgen^{-1} * e by sparse LU. Throws NumericalError for improper laws.
double ph_mean(const PhaseTypeRep& ph);
// Same quantity through BlockBidiagonalSolver; needs a partition.
double ph_mean_structured(const PhaseTypeRep& ph);

// -initial * subgen^{-1}: expected time spent in each phase before absorption.
Eigen::RowVectorXd occupation_times(const PhaseTypeRep& ph);

// Same law restricted to the phases reachable from the initial support. Returns the input
// unchanged when every phase is reachable; otherwise the partition is dropped.
PhaseTypeRep trim_unreachable(const PhaseTypeRep& ph);

// Absorption time of one simulated path. Returns +infinity when no exit is reachable
// from the current phase.
double ph_sample(const PhaseTypeRep& ph, RandomStream& rng);

}  // namespace pbftrel

#pragma once

#include <string_view>

#include "pbftrel/params.hpp"
#include "pbftrel/qbd.hpp"

namespace pbftrel {

enum class ThroughputMethod { exact_ph, rate_approx };

std::string_view to_string(ThroughputMethod m);
ThroughputMethod parse_method(std::string_view name);

enum class UnstablePolicy {
  fail,      // throw UnstableError
  saturate,  // report long-run rates of the overloaded queue (level 0 never revisited)
};

struct SolverSettings {
  double eps_r = 1e-10;
  long max_iter = 100000;
  std::size_t dim_cap = kDefaultDimensionCap;
  UnstablePolicy on_unstable = UnstablePolicy::fail;
};

struct PerformanceReport {
  ThroughputMethod method = ThroughputMethod::exact_ph;
  bool stable = true;
  double eta1 = 0.0;  // probability of an empty transaction pool
  double eta2 = 0.0;
  double r1 = 0.0;    // renewal-style block rate
  double r2 = 0.0;    // renewal-style orphan rate
  double th_block = 0.0;
  double th = 0.0;    // transactions per unit time
  double exact_block_event_rate = 0.0;
  double exact_orphan_event_rate = 0.0;
  double mean_block_time = 0.0;   // of the extended block law
  double mean_orphan_time = 0.0;  // of the extended orphan law
  StabilityVerdict drift;
  long iterations = 0;
  double rate_residual = 0.0;
  Eigen::Index level_dim = 0;
};

PerformanceReport stationary_measures(const StationaryQbd& stationary, const QbdBlocks& blocks,
                                      const PhaseTypeRep& ext_block,
                                      const PhaseTypeRep& ext_orphan, int b);

// Full pipeline with the extended phase-type laws inside the QBD.
PerformanceReport throughput_exact(const SystemParams& params, const SolverSettings& settings = {});

// Replaces both extended laws by exponentials with the same means, so each level has b
// phases.
PerformanceReport throughput_rate_approx(const SystemParams& params,
                                         const SolverSettings& settings = {});

PerformanceReport throughput(const SystemParams& params, ThroughputMethod method,
                             const SolverSettings& settings = {});

// Extended block and orphan laws of `params`.
struct ExtendedLaws {
  PhaseTypeRep block;
  PhaseTypeRep orphan;
};
ExtendedLaws extended_laws(const SystemParams& params);

}  // namespace pbftrel

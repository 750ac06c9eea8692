#include "pbftrel/measures.hpp"

#include <limits>
#include <string>

#include "pbftrel/errors.hpp"
#include "pbftrel/generators.hpp"

namespace pbftrel {

std::string_view to_string(ThroughputMethod m) {
  return m == ThroughputMethod::exact_ph ? "exact-ph" : "rate-approx";
}

ThroughputMethod parse_method(std::string_view name) {
  if (name == "exact-ph" || name == "exact" || name == "exact_ph") return ThroughputMethod::exact_ph;
  if (name == "rate-approx" || name == "approx" || name == "rate_approx") {
    return ThroughputMethod::rate_approx;
  }
  throw ValidationError("method", "unknown method '" + std::string(name) + "'");
}

ExtendedLaws extended_laws(const SystemParams& params) {
  check_params(params);
  require_positive_approval(params);
  return {PhaseTypeRep(extend_with_propagation(build_block_ph(params), params.beta)),
          PhaseTypeRep(extend_with_propagation(build_orphan_ph(params), params.beta))};
}

namespace {

double mean_or_infinity(const PhaseTypeRep& ph) {
  return ph.is_proper() ? ph_mean(ph) : std::numeric_limits<double>::infinity();
}

}  // namespace

PerformanceReport stationary_measures(const StationaryQbd& stationary, const QbdBlocks& blocks,
                                      const PhaseTypeRep& ext_block,
                                      const PhaseTypeRep& ext_orphan, int b) {
  PerformanceReport r;
  r.mean_block_time = ph_mean(ext_block);
  r.mean_orphan_time = mean_or_infinity(ext_orphan);
  r.eta1 = stationary.level0.sum();
  r.eta2 = 1.0 - r.eta1;
  r.r1 = r.eta2 / r.mean_block_time;
  r.r2 = r.eta2 / r.mean_orphan_time;
  r.th_block = r.r1;
  r.th = b * r.r1;
  const EventRates e = stationary_event_rates(stationary, blocks);
  r.exact_block_event_rate = e.block;
  r.exact_orphan_event_rate = e.orphan;
  r.level_dim = blocks.level_dim();
  return r;
}

namespace {

PerformanceReport solve_queue(const SystemParams& params, const PhaseTypeRep& blk,
                              const PhaseTypeRep& orph, ThroughputMethod method,
                              const SolverSettings& settings) {
  const StabilityVerdict drift = stability_check(blk, orph, params.lambda, params.b);
  if (!drift.stable) {
    if (settings.on_unstable == UnstablePolicy::fail) {
      throw UnstableError(drift.up_drift, drift.down_drift);
    }
    // Overloaded queue: the pool never empties, blocks are produced back to back and
    // orphans occur at their renewal rate.
    PerformanceReport r;
    r.method = method;
    r.stable = false;
    r.drift = drift;
    r.mean_block_time = ph_mean(blk);
    r.mean_orphan_time = mean_or_infinity(orph);
    r.eta1 = 0.0;
    r.eta2 = 1.0;
    r.r1 = 1.0 / r.mean_block_time;
    r.r2 = 1.0 / r.mean_orphan_time;
    r.th_block = r.r1;
    r.th = params.b * r.r1;
    r.exact_block_event_rate = drift.down_drift / params.b;
    r.exact_orphan_event_rate = (drift.up_drift - params.lambda) / params.b;
    r.level_dim = static_cast<Eigen::Index>(params.b) * blk.order() * orph.order();
    return r;
  }

  // Unreachable phases would add closed classes that the queue never visits.
  const QbdBlocks blocks = build_qbd_blocks(trim_unreachable(blk), trim_unreachable(orph),
                                            params.lambda, params.b, settings.dim_cap);
  RateIterationOptions opt;
  opt.eps = settings.eps_r;
  opt.max_iter = settings.max_iter;
  const RateMatrix rm = solve_rate_matrix(blocks, opt);
  const StationaryQbd st = solve_boundary(blocks, rm.R);
  PerformanceReport r = stationary_measures(st, blocks, blk, orph, params.b);
  r.method = method;
  r.stable = true;
  r.drift = drift;
  r.iterations = rm.iterations;
  r.rate_residual = rm.residual;
  return r;
}

}  // namespace

PerformanceReport throughput_exact(const SystemParams& params, const SolverSettings& settings) {
  check_params(params);
  require_positive_approval(params);
  // Refuse before building the laws when the level would be too large.
  const auto order = static_cast<std::size_t>(expected_size(params.n, SpaceKind::block_absorbing) + 1);
  const std::size_t level = static_cast<std::size_t>(params.b) * order * order;
  if (level > settings.dim_cap) throw DimensionError(level, settings.dim_cap);
  const ExtendedLaws laws = extended_laws(params);
  return solve_queue(params, laws.block, laws.orphan, ThroughputMethod::exact_ph, settings);
}

PerformanceReport throughput_rate_approx(const SystemParams& params,
                                         const SolverSettings& settings) {
  const ExtendedLaws laws = extended_laws(params);
  const double mean_block = ph_mean_structured(laws.block);
  const double mean_orphan = mean_or_infinity(laws.orphan);
  const PhaseTypeRep blk = PhaseTypeRep::exponential(1.0 / mean_block);
  const PhaseTypeRep orph = PhaseTypeRep::exponential(1.0 / mean_orphan);
  return solve_queue(params, blk, orph, ThroughputMethod::rate_approx, settings);
}

PerformanceReport throughput(const SystemParams& params, ThroughputMethod method,
                             const SolverSettings& settings) {
  return method == ThroughputMethod::exact_ph ? throughput_exact(params, settings)
                                              : throughput_rate_approx(params, settings);
}

}  // namespace pbftrel

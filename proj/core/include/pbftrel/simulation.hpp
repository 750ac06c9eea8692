#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pbftrel/params.hpp"
#include "pbftrel/qbd.hpp"
#include "pbftrel/random.hpp"
#include "pbftrel/sparse_generator.hpp"
#include "pbftrel/state_space.hpp"

namespace pbftrel {

struct SimEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;  // replications, or batches for time averages
  double horizon = 0.0;
  std::uint64_t seed = 0;
  bool available = true;    // false when no sample contributed

  bool within(double target, double sigmas) const {
    return available && std::abs(value - target) <= sigmas * std_error;
  }
};

enum class RoundVerdict { block, orphan, truncated };

struct RoundOutcome {
  double duration = 0.0;
  RoundVerdict verdict = RoundVerdict::truncated;
  VotingState final_state;
};

// Which outcomes may end a round. In the one-sided races the moves that would complete
// the other outcome do not happen: block_only suppresses disapprovals and failures once
// n nodes are disapproving or failed, orphan_only suppresses the (2n+1)-th approval.
enum class RoundRace { competing, block_only, orphan_only };

// Per-node clocks from (0,0,0): every idle node votes at rate gamma (approve with
// probability p) or fails at rate theta; every failed node is repaired at rate mu.
// Ends at 2n+1 approvals or n+1 disapprovals plus failures. Rates are derived here,
// independently of the generator builders.
RoundOutcome simulate_round(const SystemParams& params, RandomStream& rng,
                            double horizon = std::numeric_limits<double>::infinity(),
                            RoundRace race = RoundRace::competing);

struct RoundStats {
  SimEstimate mean_block_time;   // competing race, conditional on a block verdict
  SimEstimate mean_orphan_time;  // competing race, conditional on an orphan verdict
  SimEstimate block_probability;
  SimEstimate block_race_time;   // block_only race: the block-generation time law
  SimEstimate orphan_race_time;  // orphan_only race: the orphan-generation time law
  std::size_t truncated = 0;     // over all three races
};

// Replication r uses RandomStream(seed, 3r), (seed, 3r+1) and (seed, 3r+2) for the
// competing, block_only and orphan_only races.
RoundStats estimate_round_stats(const SystemParams& params, std::size_t reps, std::uint64_t seed,
                                double horizon = std::numeric_limits<double>::infinity());

// Time-average occupancy of one long path, first 10% of the horizon discarded and the
// rest split into equal batches.
struct OccupancyEstimate {
  Eigen::VectorXd mean;
  std::vector<Eigen::VectorXd> batches;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::size_t jumps = 0;

  SimEstimate of_state(std::size_t state) const;
  SimEstimate of_states(std::span<const std::size_t> states) const;
};

OccupancyEstimate simulate_generator(const SparseGenerator& gen, double horizon,
                                     std::uint64_t seed, std::size_t start = 0,
                                     std::size_t batches = 20);

// Hitting times of `targets` from `start`, one path per replication (stream = replication
// index). Paths still outside the targets at `horizon` report +infinity.
std::vector<double> first_passage_sample(const SparseGenerator& gen, std::size_t start,
                                         std::span<const std::size_t> targets, std::size_t reps,
                                         std::uint64_t seed,
                                         double horizon = std::numeric_limits<double>::infinity());

struct QueueSimulation {
  SimEstimate th;             // b * blocks / time
  SimEstimate level0;         // fraction of time on level 0
  SimEstimate orphan_rate;    // orphan rollbacks / time
  SimEstimate arrival_rate;   // arrivals / time
  std::size_t down_count = 0;
  std::size_t orphan_up_count = 0;
  std::size_t arrival_count = 0;
  std::size_t max_level = 0;
  double measured_time = 0.0;
};

// Path of the QBD built from `blocks`, starting on level 0 in the phase of `start`.
// Levels grow on demand up to `level_cap`; past it a NumericalError carries the
// occupancy profile.
QueueSimulation simulate_queue(const QbdBlocks& blocks, double horizon, std::uint64_t seed,
                               std::size_t start = 0, std::size_t level_cap = 1000000,
                               std::size_t batches = 20);

// Mean and standard error of a sample by Welford accumulation.
SimEstimate summarize(std::span<const double> sample);

}  // namespace pbftrel

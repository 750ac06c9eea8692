#include "pbftrel/simulation.hpp"

#include <cmath>
#include <sstream>

#include "pbftrel/errors.hpp"

namespace pbftrel {

namespace {

struct Welford {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  SimEstimate estimate() const {
    SimEstimate e;
    e.samples = count;
    e.available = count > 0;
    e.value = mean;
    e.std_error = count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1) /
                                        static_cast<double>(count))
                            : 0.0;
    return e;
  }
};

}  // namespace

SimEstimate summarize(std::span<const double> sample) {
  Welford w;
  for (double x : sample) w.add(x);
  return w.estimate();
}

RoundOutcome simulate_round(const SystemParams& s, RandomStream& rng, double horizon,
                            RoundRace race) {
  check_params(s);
  const int n = s.n;
  const int nodes = s.total_nodes();
  int approvals = 0, disapprovals = 0, failed = 0;
  double t = 0.0;
  for (;;) {
    const int idle = nodes - approvals - disapprovals - failed;
    const bool may_approve = race != RoundRace::orphan_only || approvals < 2 * n;
    const bool may_object = race != RoundRace::block_only || disapprovals + failed < n;
    const double approve = may_approve ? idle * s.gamma * s.p : 0.0;
    const double object = may_object ? idle * s.gamma * (1.0 - s.p) : 0.0;
    const double fail = may_object ? idle * s.theta : 0.0;
    const double repair = failed * s.mu;
    const double total = approve + object + fail + repair;
    if (!(total > 0.0)) return {t, RoundVerdict::truncated, {approvals, disapprovals, failed}};
    t += rng.exponential(total);
    if (t > horizon) return {horizon, RoundVerdict::truncated, {approvals, disapprovals, failed}};
    const double u = rng.uniform() * total;
    if (u < approve) {
      ++approvals;
    } else if (u < approve + object) {
      ++disapprovals;
    } else if (u < approve + object + fail) {
      ++failed;
    } else {
      --failed;
    }
    if (approvals == 2 * n + 1) return {t, RoundVerdict::block, {approvals, disapprovals, failed}};
    if (disapprovals + failed == n + 1) {
      return {t, RoundVerdict::orphan, {approvals, disapprovals, failed}};
    }
  }
}

namespace {

void add_race(Welford& acc, std::size_t& truncated, const SystemParams& params,
              RandomStream rng, double horizon, RoundRace race, RoundVerdict wanted) {
  const RoundOutcome o = simulate_round(params, rng, horizon, race);
  if (o.verdict == wanted) {
    acc.add(o.duration);
  } else {
    ++truncated;
  }
}

}  // namespace

RoundStats estimate_round_stats(const SystemParams& params, std::size_t reps, std::uint64_t seed,
                                double horizon) {
  Welford block_time, orphan_time, block_hit, block_race, orphan_race;
  RoundStats out;
  // A one-sided race that can never finish would run forever without a horizon.
  const bool block_possible = params.p > 0.0 || std::isfinite(horizon);
  const bool orphan_possible = params.p < 1.0 || params.theta > 0.0 || std::isfinite(horizon);
  for (std::size_t r = 0; r < reps; ++r) {
    if (block_possible) {
      add_race(block_race, out.truncated, params, RandomStream(seed, 3 * r + 1), horizon,
               RoundRace::block_only, RoundVerdict::block);
    }
    if (orphan_possible) {
      add_race(orphan_race, out.truncated, params, RandomStream(seed, 3 * r + 2), horizon,
               RoundRace::orphan_only, RoundVerdict::orphan);
    }

    RandomStream rng(seed, 3 * r);
    const RoundOutcome o = simulate_round(params, rng, horizon);
    switch (o.verdict) {
      case RoundVerdict::block:
        block_time.add(o.duration);
        block_hit.add(1.0);
        break;
      case RoundVerdict::orphan:
        orphan_time.add(o.duration);
        block_hit.add(0.0);
        break;
      case RoundVerdict::truncated: ++out.truncated; break;
    }
  }
  out.mean_block_time = block_time.estimate();
  out.mean_orphan_time = orphan_time.estimate();
  out.block_probability = block_hit.estimate();
  out.block_race_time = block_race.estimate();
  out.orphan_race_time = orphan_race.estimate();
  for (SimEstimate* e : {&out.mean_block_time, &out.mean_orphan_time, &out.block_probability,
                         &out.block_race_time, &out.orphan_race_time}) {
    e->seed = seed;
  }
  return out;
}

namespace {

// Cumulative jump table of a generator row.
struct JumpRow {
  double total = 0.0;
  std::vector<Eigen::Index> target;
  std::vector<double> cumulative;

  Eigen::Index pick(double u) const {
    const double x = u * total;
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
      if (x < cumulative[i]) return target[i];
    }
    return target.back();
  }
};

std::vector<JumpRow> jump_table(const SparseMatrix& m) {
  std::vector<JumpRow> rows(m.rows());
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() == r || it.value() <= 0.0) continue;
      rows[r].total += it.value();
      rows[r].target.push_back(it.col());
      rows[r].cumulative.push_back(rows[r].total);
    }
  }
  return rows;
}

SimEstimate batch_estimate(const std::vector<double>& per_batch, double horizon,
                           std::uint64_t seed) {
  SimEstimate e = summarize(per_batch);
  e.horizon = horizon;
  e.seed = seed;
  return e;
}

}  // namespace

SimEstimate OccupancyEstimate::of_states(std::span<const std::size_t> states) const {
  std::vector<double> per_batch;
  for (const auto& b : batches) {
    double v = 0.0;
    for (auto s : states) v += b[static_cast<Eigen::Index>(s)];
    per_batch.push_back(v);
  }
  return batch_estimate(per_batch, horizon, seed);
}

SimEstimate OccupancyEstimate::of_state(std::size_t state) const {
  const std::size_t one[] = {state};
  return of_states(one);
}

OccupancyEstimate simulate_generator(const SparseGenerator& gen, double horizon,
                                     std::uint64_t seed, std::size_t start, std::size_t batches) {
  if (!(horizon > 0.0)) throw ValidationError("horizon", "horizon must be positive");
  if (batches < 2) throw ValidationError("batches", "need at least two batches");
  const auto table = jump_table(gen.matrix());
  const auto d = static_cast<Eigen::Index>(table.size());
  RandomStream rng(seed, 0);

  const double burn = 0.1 * horizon;
  const double width = (horizon - burn) / static_cast<double>(batches);
  OccupancyEstimate out;
  out.horizon = horizon;
  out.seed = seed;
  out.batches.assign(batches, Eigen::VectorXd::Zero(d));

  // Adds the time spent in `state` over [a, b) to the batches it overlaps.
  const auto credit = [&](Eigen::Index state, double a, double b) {
    a = std::max(a, burn);
    while (a < b) {
      const auto idx = std::min(batches - 1, static_cast<std::size_t>((a - burn) / width));
      const double edge = burn + width * static_cast<double>(idx + 1);
      const double stop = idx + 1 == batches ? b : std::min(b, edge);
      out.batches[idx][state] += stop - a;
      a = stop;
    }
  };

  auto cur = static_cast<Eigen::Index>(start);
  double t = 0.0;
  while (t < horizon) {
    const JumpRow& row = table[cur];
    const double stay = row.total > 0.0 ? rng.exponential(row.total)
                                        : std::numeric_limits<double>::infinity();
    const double next_t = std::min(horizon, t + stay);
    if (next_t > burn) credit(cur, t, next_t);
    t = next_t;
    if (t >= horizon) break;
    cur = row.pick(rng.uniform());
    ++out.jumps;
  }
  out.mean = Eigen::VectorXd::Zero(d);
  for (auto& b : out.batches) {
    b /= width;
    out.mean += b;
  }
  out.mean /= static_cast<double>(batches);
  return out;
}

std::vector<double> first_passage_sample(const SparseGenerator& gen, std::size_t start,
                                         std::span<const std::size_t> targets, std::size_t reps,
                                         std::uint64_t seed, double horizon) {
  const auto table = jump_table(gen.matrix());
  std::vector<char> hit(table.size(), 0);
  for (auto t : targets) hit.at(t) = 1;
  std::vector<double> out;
  out.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    RandomStream rng(seed, r);
    auto cur = static_cast<Eigen::Index>(start);
    double t = 0.0;
    while (!hit[cur] && t < horizon) {
      const JumpRow& row = table[cur];
      if (!(row.total > 0.0)) {
        t = std::numeric_limits<double>::infinity();
        break;
      }
      t += rng.exponential(row.total);
      cur = row.pick(rng.uniform());
    }
    out.push_back(hit[cur] && t <= horizon ? t : std::numeric_limits<double>::infinity());
  }
  return out;
}

namespace {

enum class Move { local, local_arrival, up_arrival, up_orphan, down };

struct QueueJump {
  Move move;
  Eigen::Index target;
  double rate;
};

using JumpList = std::vector<std::vector<QueueJump>>;

void add_block(JumpList& rows, const Eigen::MatrixXd& m, Move move) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) > 0.0) rows[r].push_back({move, c, m(r, c)});
    }
  }
}

// Within-level moves; those into the next remainder block are arrivals.
void add_local(JumpList& rows, const Eigen::MatrixXd& m, Eigen::Index per_remainder) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (r == c || !(m(r, c) > 0.0)) continue;
      const bool arrival = c / per_remainder == r / per_remainder + 1;
      rows[r].push_back({arrival ? Move::local_arrival : Move::local, c, m(r, c)});
    }
  }
}

struct QueueRows {
  std::vector<std::vector<QueueJump>> jumps;
  std::vector<double> total;

  void finish() {
    total.assign(jumps.size(), 0.0);
    for (std::size_t r = 0; r < jumps.size(); ++r) {
      for (const auto& j : jumps[r]) total[r] += j.rate;
    }
  }
  const QueueJump& pick(std::size_t r, double u) const {
    double x = u * total[r];
    for (const auto& j : jumps[r]) {
      if (x < j.rate) return j;
      x -= j.rate;
    }
    return jumps[r].back();
  }
};

}  // namespace

QueueSimulation simulate_queue(const QbdBlocks& q, double horizon, std::uint64_t seed,
                               std::size_t start, std::size_t level_cap, std::size_t batches) {
  if (!(horizon > 0.0)) throw ValidationError("horizon", "horizon must be positive");
  QueueRows zero, one, many;
  const Eigen::Index per0 = q.orphan_order;
  const Eigen::Index per = q.orphan_order * q.service_order;
  zero.jumps.resize(q.boundary_dim());
  add_local(zero.jumps, q.boundary_local, per0);
  add_block(zero.jumps, q.boundary_up - q.boundary_up_arrival, Move::up_orphan);
  add_block(zero.jumps, q.boundary_up_arrival, Move::up_arrival);
  one.jumps.resize(q.level_dim());
  add_block(one.jumps, q.first_down, Move::down);
  add_local(one.jumps, q.local, per);
  add_block(one.jumps, q.up - q.up_arrival, Move::up_orphan);
  add_block(one.jumps, q.up_arrival, Move::up_arrival);
  many.jumps.resize(q.level_dim());
  add_block(many.jumps, q.down, Move::down);
  add_local(many.jumps, q.local, per);
  add_block(many.jumps, q.up - q.up_arrival, Move::up_orphan);
  add_block(many.jumps, q.up_arrival, Move::up_arrival);
  for (QueueRows* r : {&zero, &one, &many}) r->finish();

  RandomStream rng(seed, 0);
  const double burn = 0.1 * horizon;
  const double width = (horizon - burn) / static_cast<double>(batches);
  std::vector<double> downs(batches, 0.0), orphans(batches, 0.0), arrivals(batches, 0.0),
      idle(batches, 0.0);
  std::vector<double> occupancy;  // time per level, for diagnostics

  QueueSimulation out;
  std::size_t level = 0;
  auto phase = static_cast<Eigen::Index>(start);
  double t = 0.0;
  const auto batch_of = [&](double time) {
    return std::min(batches - 1, static_cast<std::size_t>((time - burn) / width));
  };

  while (t < horizon) {
    const QueueRows& rows = level == 0 ? zero : (level == 1 ? one : many);
    const double rate = rows.total[phase];
    const double stay = rate > 0.0 ? rng.exponential(rate) : std::numeric_limits<double>::infinity();
    const double next_t = std::min(horizon, t + stay);
    if (occupancy.size() <= level) occupancy.resize(level + 1, 0.0);
    occupancy[level] += next_t - t;
    if (level == 0 && next_t > burn) {
      double a = std::max(t, burn);
      while (a < next_t) {
        const auto idx = batch_of(a);
        const double edge = burn + width * static_cast<double>(idx + 1);
        const double stop = idx + 1 == batches ? next_t : std::min(next_t, edge);
        idle[idx] += stop - a;
        a = stop;
      }
    }
    t = next_t;
    if (t >= horizon) break;

    const QueueJump& j = rows.pick(phase, rng.uniform());
    const bool counted = t > burn;
    switch (j.move) {
      case Move::local:
      case Move::local_arrival: break;
      case Move::down:
        --level;
        if (counted) {
          downs[batch_of(t)] += 1.0;
          ++out.down_count;
        }
        break;
      case Move::up_orphan:
        ++level;
        if (counted) {
          orphans[batch_of(t)] += 1.0;
          ++out.orphan_up_count;
        }
        break;
      case Move::up_arrival:
        ++level;
        break;
    }
    const bool arrival = j.move == Move::up_arrival || j.move == Move::local_arrival;
    if (arrival && counted) {
      arrivals[batch_of(t)] += 1.0;
      ++out.arrival_count;
    }
    phase = j.target;
    out.max_level = std::max(out.max_level, level);
    if (level > level_cap) {
      std::ostringstream os;
      os << "queue simulation exceeded " << level_cap << " levels; time per level:";
      for (std::size_t k = 0; k < std::min<std::size_t>(occupancy.size(), 10); ++k) {
        os << ' ' << occupancy[k];
      }
      throw NumericalError(os.str());
    }
  }

  out.measured_time = horizon - burn;
  std::vector<double> th(batches), l0(batches), orp(batches), arr(batches);
  for (std::size_t i = 0; i < batches; ++i) {
    th[i] = q.b * downs[i] / width;
    l0[i] = idle[i] / width;
    orp[i] = orphans[i] / width;
    arr[i] = arrivals[i] / width;
  }
  out.th = batch_estimate(th, horizon, seed);
  out.level0 = batch_estimate(l0, horizon, seed);
  out.orphan_rate = batch_estimate(orp, horizon, seed);
  out.arrival_rate = batch_estimate(arr, horizon, seed);
  return out;
}

}  // namespace pbftrel

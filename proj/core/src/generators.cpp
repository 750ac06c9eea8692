#include "pbftrel/generators.hpp"

#include "pbftrel/errors.hpp"

namespace pbftrel {

namespace {

enum class Target { block, orphan };

AbsorbingChain build_voting_chain(const SystemParams& s, Target target) {
  check_params(s);
  const StateIndexer space(s.n, target == Target::block ? SpaceKind::block_absorbing
                                                         : SpaceKind::orphan_absorbing);
  const int n = s.n;
  const int N = s.total_nodes();
  GeneratorBuilder g(space.size(), space.size());

  for (std::size_t m = 0; m < space.size(); ++m) {
    const auto [k, i, j] = space.state_of(m);
    const double idle = N - k - i - j;
    const auto row = static_cast<Eigen::Index>(m);

    const double approve = idle * s.gamma * s.p;
    if (k < 2 * n) {
      g.add(row, space.index_of({k + 1, i, j}), approve);
    } else if (target == Target::block) {
      g.add_exit(row, approve);
    }

    const double disapprove = idle * s.gamma * s.q();
    const double fail = idle * s.theta;
    if (i + j < n) {
      g.add(row, space.index_of({k, i + 1, j}), disapprove);
      g.add(row, space.index_of({k, i, j + 1}), fail);
    } else if (target == Target::orphan) {
      g.add_exit(row, disapprove + fail);
    }

    if (j > 0) g.add(row, space.index_of({k, i, j - 1}), j * s.mu);
  }

  AbsorbingChain chain;
  chain.initial = Eigen::VectorXd::Zero(space.size());
  chain.initial[0] = 1.0;
  chain.exit = g.exit();
  chain.subgenerator = g.finish(Conservativity::sub_conservative);
  chain.partition = space.partition();
  return chain;
}

}  // namespace

AbsorbingChain build_block_ph(const SystemParams& params) {
  return build_voting_chain(params, Target::block);
}

AbsorbingChain build_orphan_ph(const SystemParams& params) {
  return build_voting_chain(params, Target::orphan);
}

AbsorbingChain extend_with_propagation(const AbsorbingChain& chain, double beta) {
  if (!(beta > 0.0)) throw ValidationError("beta", "beta must be positive");
  check_absorbing(chain);
  const auto& sub = chain.subgenerator.matrix();
  const Eigen::Index d = sub.rows();

  GeneratorBuilder g(d + 1, d + 1);
  for (Eigen::Index r = 0; r < sub.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(sub, r); it; ++it) {
      if (it.col() != r) g.add(r, it.col(), it.value());
    }
    g.add(r, d, chain.exit[r]);
  }
  g.add_exit(d, beta);

  AbsorbingChain out;
  out.initial = Eigen::VectorXd::Zero(d + 1);
  out.initial.head(d) = chain.initial;
  out.exit = Eigen::VectorXd::Zero(d + 1);
  out.exit[d] = beta;
  out.subgenerator = g.finish(Conservativity::sub_conservative);

  if (chain.partition) {
    const BlockPartition& p = *chain.partition;
    const std::size_t last_begin = p.level_offsets[p.levels() - 1];
    bool exits_in_last_level = true;
    for (std::size_t r = 0; r < last_begin; ++r) exits_in_last_level &= chain.exit[r] == 0.0;
    if (exits_in_last_level) {
      out.partition = p;
      out.partition->append_level(1);
    }
  }
  return out;
}

SparseGenerator build_full_cycle_Q(const SystemParams& s) {
  check_params(s);
  const StateIndexer space(s.n, SpaceKind::full_cycle);
  const int n = s.n;
  const int N = s.total_nodes();
  GeneratorBuilder g(space.size(), space.size());
  const Eigen::Index origin = 0;

  for (std::size_t m = 0; m < space.size(); ++m) {
    const auto [k, i, j] = space.state_of(m);
    const auto row = static_cast<Eigen::Index>(m);
    const double idle = N - k - i - j;

    if (k <= 2 * n && i + j <= n) {
      g.add(row, space.index_of({k + 1, i, j}), idle * s.gamma * s.p);
      g.add(row, space.index_of({k, i + 1, j}), idle * s.gamma * s.q());
      g.add(row, space.index_of({k, i, j + 1}), idle * s.theta);
    } else if (k == 2 * n + 1) {
      if (i + j < n) {
        g.add(row, space.index_of({k, i + 1, j}), idle * s.gamma * s.q());
        g.add(row, space.index_of({k, i, j + 1}), idle * s.theta);
      }
      g.add(row, origin, s.beta);
    } else {
      // orphan state: rolls back, repairs continue meanwhile
      g.add(row, origin, s.beta);
    }
    if (j > 0) g.add(row, space.index_of({k, i, j - 1}), j * s.mu);
  }
  return g.finish(Conservativity::conservative);
}

SparseGenerator build_birth_death(const SystemParams& s) {
  check_params(s);
  const int N = s.total_nodes();
  GeneratorBuilder g(N + 1, N + 1);
  for (int f = 0; f <= N; ++f) {
    if (f < N) g.add(f, f + 1, (N - f) * s.theta);
    if (f > 0) g.add(f, f - 1, f * s.mu);
  }
  return g.finish(Conservativity::conservative);
}

AbsorbingChain build_inherent_absorbing(const SystemParams& s) {
  check_params(s);
  const int n = s.n;
  const int N = s.total_nodes();
  GeneratorBuilder g(n + 1, n + 1);
  for (int f = 0; f <= n; ++f) {
    if (f < n) {
      g.add(f, f + 1, (N - f) * s.theta);
    } else {
      g.add_exit(f, (N - n) * s.theta);
    }
    if (f > 0) g.add(f, f - 1, f * s.mu);
  }
  AbsorbingChain chain;
  chain.initial = Eigen::VectorXd::Zero(n + 1);
  chain.initial[0] = 1.0;
  chain.exit = g.exit();
  chain.subgenerator = g.finish(Conservativity::sub_conservative);
  chain.partition = StateIndexer(n, SpaceKind::inherent_absorbing).partition();
  return chain;
}

AbsorbingChain build_operational_absorbing(const SystemParams& s) {
  const SparseGenerator q = build_full_cycle_Q(s);
  const StateIndexer full(s.n, SpaceKind::full_cycle);
  const StateIndexer kept(s.n, SpaceKind::operational_absorbing);

  GeneratorBuilder g(kept.size(), kept.size());
  const auto& m = q.matrix();
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto src = full.index_of(kept.state_of(r));
    for (SparseMatrix::InnerIterator it(m, src); it; ++it) {
      if (static_cast<std::size_t>(it.col()) == src) continue;
      if (auto dst = kept.find(full.state_of(it.col()))) {
        g.add(r, *dst, it.value());
      } else {
        g.add_exit(r, it.value());
      }
    }
  }
  AbsorbingChain chain;
  chain.initial = Eigen::VectorXd::Zero(kept.size());
  chain.initial[0] = 1.0;
  chain.exit = g.exit();
  chain.subgenerator = g.finish(Conservativity::sub_conservative);
  return chain;
}

}  // namespace pbftrel

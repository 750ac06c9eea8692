#include "pbftrel/state_space.hpp"

#include <stdexcept>
#include <string>

#include "pbftrel/errors.hpp"

namespace pbftrel {

std::string_view to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::block_absorbing: return "block-absorbing";
    case SpaceKind::orphan_absorbing: return "orphan-absorbing";
    case SpaceKind::full_cycle: return "full-cycle";
    case SpaceKind::birth_death: return "birth-death";
    case SpaceKind::inherent_absorbing: return "inherent-absorbing";
    case SpaceKind::operational_absorbing: return "operational-absorbing";
  }
  return "unknown";
}

SpaceKind parse_space_kind(std::string_view name) {
  std::string norm(name);
  for (char& c : norm) {
    if (c == '_') c = '-';
  }
  for (SpaceKind k : {SpaceKind::block_absorbing, SpaceKind::orphan_absorbing, SpaceKind::full_cycle,
                      SpaceKind::birth_death, SpaceKind::inherent_absorbing,
                      SpaceKind::operational_absorbing}) {
    if (norm == to_string(k)) return k;
  }
  throw ValidationError("kind", "unknown state-space kind '" + std::string(name) + "'");
}

void BlockPartition::append_level(std::size_t size) {
  if (level_offsets.empty()) level_offsets.push_back(0);
  level_offsets.push_back(level_offsets.back() + size);
  group_offsets.push_back({0, size});
}

namespace {

// Largest admissible i+j on level k.
int level_budget(int n, SpaceKind kind, int k) {
  switch (kind) {
    case SpaceKind::full_cycle: return k <= 2 * n ? n + 1 : n;
    default: return n;
  }
}

int top_level(int n, SpaceKind kind) {
  switch (kind) {
    case SpaceKind::block_absorbing:
    case SpaceKind::orphan_absorbing: return 2 * n;
    case SpaceKind::full_cycle:
    case SpaceKind::operational_absorbing: return 2 * n + 1;
    default: return 0;
  }
}

}  // namespace

StateIndexer::StateIndexer(int n, SpaceKind kind) : n_(n), kind_(kind) {
  if (n < 1) throw ValidationError("n", "n must be at least 1");

  partition_.level_offsets.push_back(0);
  if (kind == SpaceKind::birth_death || kind == SpaceKind::inherent_absorbing) {
    const int top = kind == SpaceKind::birth_death ? 3 * n + 1 : n;
    for (int j = 0; j <= top; ++j) states_.push_back({0, 0, j});
    partition_.level_offsets.push_back(states_.size());
    partition_.group_offsets.push_back({0, states_.size()});
    k_extent_ = 1;
    i_extent_ = 1;
    j_extent_ = top + 1;
  } else {
    const int kmax = top_level(n, kind);
    for (int k = 0; k <= kmax; ++k) {
      const int budget = level_budget(n, kind, k);
      std::vector<std::size_t> groups{0};
      const std::size_t begin = states_.size();
      for (int i = 0; i <= budget; ++i) {
        for (int j = 0; i + j <= budget; ++j) states_.push_back({k, i, j});
        groups.push_back(states_.size() - begin);
      }
      partition_.level_offsets.push_back(states_.size());
      partition_.group_offsets.push_back(std::move(groups));
    }
    k_extent_ = kmax + 1;
    i_extent_ = n + 2;
    j_extent_ = n + 2;
  }

  lookup_.assign(static_cast<std::size_t>(k_extent_) * i_extent_ * j_extent_, -1);
  for (std::size_t m = 0; m < states_.size(); ++m) {
    const auto& s = states_[m];
    lookup_[(static_cast<std::size_t>(s.k) * i_extent_ + s.i) * j_extent_ + s.j] =
        static_cast<std::ptrdiff_t>(m);
  }
}

const VotingState& StateIndexer::state_of(std::size_t index) const {
  if (index >= states_.size()) throw std::out_of_range("state index out of range");
  return states_[index];
}

std::optional<std::size_t> StateIndexer::find(const VotingState& s) const {
  if (s.k < 0 || s.i < 0 || s.j < 0 || s.k >= k_extent_ || s.i >= i_extent_ || s.j >= j_extent_) {
    return std::nullopt;
  }
  const auto m = lookup_[(static_cast<std::size_t>(s.k) * i_extent_ + s.i) * j_extent_ + s.j];
  if (m < 0) return std::nullopt;
  return static_cast<std::size_t>(m);
}

std::size_t StateIndexer::index_of(const VotingState& s) const {
  if (auto m = find(s)) return *m;
  throw std::out_of_range("state (" + std::to_string(s.k) + "," + std::to_string(s.i) + "," +
                          std::to_string(s.j) + ") is not in the " +
                          std::string(to_string(kind_)) + " space");
}

StateIndexer build_indexer(int n, SpaceKind kind) { return StateIndexer(n, kind); }

std::size_t expected_size(int n, SpaceKind kind) {
  const std::size_t u = static_cast<std::size_t>(n);
  switch (kind) {
    case SpaceKind::block_absorbing:
    case SpaceKind::orphan_absorbing: return (2 * u + 1) * (u + 1) * (u + 2) / 2;
    case SpaceKind::full_cycle:
      return (2 * u + 1) * (u + 2) * (u + 3) / 2 + (u + 1) * (u + 2) / 2;
    case SpaceKind::birth_death: return 3 * u + 2;
    case SpaceKind::inherent_absorbing: return u + 1;
    case SpaceKind::operational_absorbing: return (2 * u + 2) * (u + 1) * (u + 2) / 2;
  }
  return 0;
}

}  // namespace pbftrel

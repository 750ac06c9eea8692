#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace pbftrel {

// k approvals, i disapprovals, j failed nodes. The one-dimensional chains (birth-death,
// inherent-absorbing) use k = i = 0 and j = number of failed nodes.
struct VotingState {
  int k = 0;
  int i = 0;
  int j = 0;

  friend auto operator<=>(const VotingState&, const VotingState&) = default;
};

enum class SpaceKind {
  block_absorbing,
  orphan_absorbing,
  full_cycle,
  birth_death,
  inherent_absorbing,
  operational_absorbing,
};

std::string_view to_string(SpaceKind kind);
// Accepts the names printed by to_string, with '-' or '_' as separator.
SpaceKind parse_space_kind(std::string_view name);

// Two-level grouping of consecutive indices: levels, then groups inside each level.
// Used by the block-bidiagonal solvers.
struct BlockPartition {
  std::vector<std::size_t> level_offsets;               // size levels+1
  std::vector<std::vector<std::size_t>> group_offsets;  // per level, relative, size groups+1

  std::size_t size() const { return level_offsets.empty() ? 0 : level_offsets.back(); }
  std::size_t levels() const { return level_offsets.size() - 1; }
  std::size_t level_size(std::size_t level) const {
    return level_offsets[level + 1] - level_offsets[level];
  }
  // Appends a level consisting of a single group.
  void append_level(std::size_t size);
};

class StateIndexer {
 public:
  StateIndexer(int n, SpaceKind kind);

  int n() const noexcept { return n_; }
  SpaceKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return states_.size(); }
  std::span<const VotingState> states() const noexcept { return states_; }

  const VotingState& state_of(std::size_t index) const;
  std::optional<std::size_t> find(const VotingState& s) const;
  // Throws std::out_of_range for states outside the space.
  std::size_t index_of(const VotingState& s) const;

  // Levels are the distinct k values (a single level for one-dimensional chains); groups
  // inside a level are the distinct i values.
  const BlockPartition& partition() const noexcept { return partition_; }
  std::size_t level_begin(int k) const { return partition_.level_offsets.at(k); }
  std::size_t level_size(int k) const { return partition_.level_size(k); }

 private:
  int n_;
  SpaceKind kind_;
  std::vector<VotingState> states_;
  int k_extent_ = 0;
  int i_extent_ = 0;
  int j_extent_ = 0;
  std::vector<std::ptrdiff_t> lookup_;
  BlockPartition partition_;
};

StateIndexer build_indexer(int n, SpaceKind kind);

// Closed-form state counts.
std::size_t expected_size(int n, SpaceKind kind);

}  // namespace pbftrel

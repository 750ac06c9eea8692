#pragma once

#include "pbftrel/params.hpp"
#include "pbftrel/sparse_generator.hpp"
#include "pbftrel/state_space.hpp"

namespace pbftrel {

// All builders emit rates from per-node transition semantics over the canonical indexers.

// Time to a block: absorbing on the (2n+1)-th approval. Transient space is the
// block-absorbing indexer. Disapprovals and failures that would reach i+j = n+1 are not
// part of this chain and do not enter the diagonal.
AbsorbingChain build_block_ph(const SystemParams& params);

// Time to an orphan: absorbing when i+j reaches n+1. Approvals past level 2n are not part
// of this chain.
AbsorbingChain build_orphan_ph(const SystemParams& params);

// Appends one phase with sojourn rate beta after absorption of `chain`.
AbsorbingChain extend_with_propagation(const AbsorbingChain& chain, double beta);

// Conservative generator of the whole voting cycle, including orphan states
// (i+j = n+1) and block states (level 2n+1), both returning to (0,0,0) at rate beta.
SparseGenerator build_full_cycle_Q(const SystemParams& params);

// Number of failed nodes among all 3n+1.
SparseGenerator build_birth_death(const SystemParams& params);

// Failed-node count absorbed on reaching n+1.
AbsorbingChain build_inherent_absorbing(const SystemParams& params);

// Full cycle with orphan states made absorbing.
AbsorbingChain build_operational_absorbing(const SystemParams& params);

}  // namespace pbftrel

#pragma once

#include <cstdint>
#include <vector>

#include "tkgr/dataset.hpp"
#include "tkgr/quadruple.hpp"
#include "tkgr/rng.hpp"

namespace tkgr {

enum class CorruptionSlot : std::uint8_t { head, tail };

struct CorruptionOptions {
  /// Slot probabilities from the relation's head/tail multiplicities instead
  /// of a fair coin.
  bool bern = true;
  /// Reject corruptions that are known true facts (any split). Off by
  /// default: with a small candidate count over a large vocabulary, false
  /// negatives are improbable.
  bool filter_known = false;
  /// Time-aware sampling: replacements come from entities active in
  /// snapshots [t - window, t].
  std::uint32_t window = 1;
  SplitMask window_splits = SplitMask::train;
};

struct Corruption {
  Quadruple quadruple;
  CorruptionSlot slot;
};

/// Replaces the subject or object of g with a uniformly drawn different
/// entity. Slot chosen per bern probabilities when enabled, else 0.5/0.5.
Corruption sample_random(const Quadruple& g, const TkgDataset& dataset,
                         const RelationCardinality& cardinality, Rng& rng,
                         const CorruptionOptions& options = {});

/// As sample_random, but the replacement is drawn from entities active in the
/// trailing snapshot window. Falls back to sample_random when no eligible
/// entity exists.
Corruption sample_time_aware(const Quadruple& g, const TkgDataset& dataset,
                             const RelationCardinality& cardinality, Rng& rng,
                             const CorruptionOptions& options = {});

/// Candidate negative set Neg(g): distinct single-slot corruptions of one
/// positive, all sharing its predicate and timestamp.
struct CandidateSet {
  Quadruple positive;
  std::vector<Quadruple> candidates;
  std::vector<CorruptionSlot> slots;

  std::size_t size() const noexcept { return candidates.size(); }
};

/// Draws `count` distinct corruptions of g. Throws SamplingError (carrying
/// the achieved count) when the candidate space is exhausted first.
CandidateSet build_candidates(const Quadruple& g, std::size_t count,
                              const TkgDataset& dataset,
                              const RelationCardinality& cardinality, Rng& rng,
                              const CorruptionOptions& options = {});

}  // namespace tkgr

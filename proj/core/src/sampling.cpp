#include "tkgr/sampling.hpp"

#include <algorithm>
#include <unordered_set>

#include "tkgr/errors.hpp"

namespace tkgr {

namespace {

CorruptionSlot choose_slot(const Quadruple& g,
                           const RelationCardinality& cardinality, Rng& rng,
                           bool bern) {
  const double p_head = bern ? cardinality.replace_head_prob(g.predicate) : 0.5;
  return rng.bernoulli(p_head) ? CorruptionSlot::head : CorruptionSlot::tail;
}

/// Uniform entity different from `original`, drawn without rejection.
std::uint32_t different_entity(std::uint32_t original, std::size_t vocab,
                               Rng& rng) {
  auto draw = static_cast<std::uint32_t>(rng.below(vocab - 1));
  return draw >= original ? draw + 1 : draw;
}

Quadruple apply_slot(const Quadruple& g, CorruptionSlot slot,
                     std::uint32_t replacement) {
  Quadruple neg = g;
  if (slot == CorruptionSlot::head) {
    neg.subject = replacement;
  } else {
    neg.object = replacement;
  }
  return neg;
}

}  // namespace

Corruption sample_random(const Quadruple& g, const TkgDataset& dataset,
                         const RelationCardinality& cardinality, Rng& rng,
                         const CorruptionOptions& options) {
  const std::size_t vocab = dataset.num_entities();
  if (vocab < 2) {
    throw SamplingError("cannot corrupt with an entity vocabulary of size " +
                        std::to_string(vocab));
  }
  const CorruptionSlot slot = choose_slot(g, cardinality, rng, options.bern);
  const std::uint32_t original =
      slot == CorruptionSlot::head ? g.subject : g.object;
  return {apply_slot(g, slot, different_entity(original, vocab, rng)), slot};
}

Corruption sample_time_aware(const Quadruple& g, const TkgDataset& dataset,
                             const RelationCardinality& cardinality, Rng& rng,
                             const CorruptionOptions& options) {
  const std::uint32_t first =
      g.time >= options.window ? g.time - options.window : 0;
  const std::vector<std::uint32_t> active =
      dataset.active_entities(first, g.time, options.window_splits);

  const CorruptionSlot slot = choose_slot(g, cardinality, rng, options.bern);
  const std::uint32_t original =
      slot == CorruptionSlot::head ? g.subject : g.object;

  const bool has_original =
      std::binary_search(active.begin(), active.end(), original);
  const std::size_t eligible = active.size() - (has_original ? 1 : 0);
  if (eligible == 0) {
    return sample_random(g, dataset, cardinality, rng, options);
  }

  std::size_t pick = static_cast<std::size_t>(rng.below(eligible));
  if (has_original) {
    const std::size_t original_pos = static_cast<std::size_t>(
        std::lower_bound(active.begin(), active.end(), original) -
        active.begin());
    if (pick >= original_pos) {
      ++pick;
    }
  }
  return {apply_slot(g, slot, active[pick]), slot};
}

CandidateSet build_candidates(const Quadruple& g, std::size_t count,
                              const TkgDataset& dataset,
                              const RelationCardinality& cardinality, Rng& rng,
                              const CorruptionOptions& options) {
  if (count == 0) {
    throw ConfigError("candidate count must be at least 1");
  }
  const std::size_t vocab = dataset.num_entities();
  if (vocab < 2) {
    throw SamplingError("cannot corrupt with an entity vocabulary of size " +
                        std::to_string(vocab));
  }

  CandidateSet set;
  set.positive = g;
  set.candidates.reserve(count);
  set.slots.reserve(count);
  std::unordered_set<Quadruple, QuadrupleHash> seen;

  const auto admit = [&](const Quadruple& neg, CorruptionSlot slot) {
    if (seen.count(neg)) {
      return false;
    }
    if (options.filter_known && dataset.contains(neg)) {
      return false;
    }
    seen.insert(neg);
    set.candidates.push_back(neg);
    set.slots.push_back(slot);
    return true;
  };

  std::size_t attempts = 0;
  const std::size_t attempt_budget = 20 * count + 200;
  while (set.candidates.size() < count && attempts < attempt_budget) {
    ++attempts;
    const CorruptionSlot slot = choose_slot(g, cardinality, rng, options.bern);
    const std::uint32_t original =
        slot == CorruptionSlot::head ? g.subject : g.object;
    admit(apply_slot(g, slot, different_entity(original, vocab, rng)), slot);
  }

  if (set.candidates.size() < count) {
    // Rejection stalled: the candidate space is nearly exhausted. Sweep it
    // deterministically to fill up or prove infeasibility.
    for (CorruptionSlot slot : {CorruptionSlot::head, CorruptionSlot::tail}) {
      const std::uint32_t original =
          slot == CorruptionSlot::head ? g.subject : g.object;
      for (std::uint32_t e = 0;
           e < vocab && set.candidates.size() < count; ++e) {
        if (e == original) {
          continue;
        }
        admit(apply_slot(g, slot, e), slot);
      }
    }
  }

  if (set.candidates.size() < count) {
    throw SamplingError("candidate space exhausted: produced " +
                            std::to_string(set.candidates.size()) + " of " +
                            std::to_string(count) + " requested corruptions",
                        set.candidates.size());
  }
  return set;
}

}  // namespace tkgr

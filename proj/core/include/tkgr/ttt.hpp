#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tkgr/dataset.hpp"
#include "tkgr/distribution.hpp"
#include "tkgr/lstm.hpp"
#include "tkgr/score_model.hpp"

namespace tkgr {

struct TttConfig {
  double learning_rate = 0.5;
  std::size_t steps = 1;          // adaptation steps per snapshot
  std::size_t horizon = 0;        // prediction period; 0 = all test snapshots
  enum class Subset : std::uint8_t { all_parameters, entity_embeddings };
  Subset subset = Subset::entity_embeddings;
  CountMode mode = CountMode::object_only;
  bool include_validation_history = true;

  void validate() const;
};

TttConfig::Subset parse_ttt_subset(std::string_view text);
std::string_view to_string(TttConfig::Subset subset);

struct AdaptTraceEntry {
  std::uint32_t snapshot_time = 0;
  std::size_t step = 0;  // 0 = before any update; last entry = after final one
  double l_cmp = 0.0;

  std::string to_json_line() const;
};

struct TttResult {
  ScoreModel model;
  std::vector<AdaptTraceEntry> trace;
  std::size_t snapshots_adapted = 0;
  bool truncated = false;  // horizon exceeded the available test snapshots
};

/// Comparison loss between aggregated model logits and the pseudo-label:
/// L = -sum_j x_j log softmax(P)_j.
double comparison_loss(std::span<const double> logits,
                       std::span<const double> pseudo_label);

/// d L / d P = softmax(P) - x.
std::vector<double> comparison_loss_grad(std::span<const double> logits,
                                         std::span<const double> pseudo_label);

/// Mean plausibility of every entity as the object of the snapshot's
/// queries (s, p, ?, t); these are the logits P compared against the
/// pseudo-label.
std::vector<double> snapshot_logits(const ScoreModel& model,
                                    std::span<const Quadruple> queries);

/// Streams over the test snapshots in time order. For each snapshot: predict
/// the pseudo-label from the trailing known distributions, take `steps`
/// descent steps on the configured parameter subset against the comparison
/// loss, then append the realized snapshot distribution to the history. The
/// predictor is never modified; the pseudo-label for a snapshot never sees
/// that snapshot or anything later.
TttResult ttt_adapt(ScoreModel model, const LstmPredictor& predictor,
                    const TkgDataset& dataset, const TttConfig& config);

}  // namespace tkgr

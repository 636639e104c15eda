#include "tkgr/ttt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "tkgr/errors.hpp"

namespace tkgr {

void TttConfig::validate() const {
  if (steps > 0 && !(learning_rate > 0.0)) {
    throw ConfigError("adaptation learning rate must be positive");
  }
}

TttConfig::Subset parse_ttt_subset(std::string_view text) {
  if (text == "entity" || text == "entity-embeddings") {
    return TttConfig::Subset::entity_embeddings;
  }
  if (text == "all") {
    return TttConfig::Subset::all_parameters;
  }
  throw ConfigError("unknown adaptation subset '" + std::string(text) + "'");
}

std::string_view to_string(TttConfig::Subset subset) {
  return subset == TttConfig::Subset::entity_embeddings ? "entity-embeddings"
                                                        : "all";
}

std::string AdaptTraceEntry::to_json_line() const {
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "{\"snapshot\":%u,\"step\":%zu,\"l_cmp\":%.17g}",
                snapshot_time, step, l_cmp);
  return buf;
}

namespace {

/// Stable log-softmax of the logits.
std::vector<double> log_softmax(std::span<const double> logits) {
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double lse = 0.0;
  for (double u : logits) {
    lse += std::exp(u - max_logit);
  }
  lse = max_logit + std::log(lse);
  std::vector<double> out(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = logits[j] - lse;
  }
  return out;
}

void accumulate_subset(RowGradients& dst, const RowGradients& src,
                       double scale,
                       const std::vector<bool>& tensor_allowed) {
  for (const RowGradients::Entry& e : src.entries()) {
    if (!tensor_allowed[e.tensor]) {
      continue;
    }
    auto& buf = dst.at(e.tensor, e.row, e.values.size());
    for (std::size_t k = 0; k < e.values.size(); ++k) {
      buf[k] += scale * e.values[k];
    }
  }
}

}  // namespace

double comparison_loss(std::span<const double> logits,
                       std::span<const double> pseudo_label) {
  if (logits.size() != pseudo_label.size()) {
    throw ConfigError("logits and pseudo-label dimensions differ");
  }
  const std::vector<double> log_probs = log_softmax(logits);
  double loss = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    loss -= pseudo_label[j] * log_probs[j];
  }
  return loss;
}

std::vector<double> comparison_loss_grad(
    std::span<const double> logits, std::span<const double> pseudo_label) {
  if (logits.size() != pseudo_label.size()) {
    throw ConfigError("logits and pseudo-label dimensions differ");
  }
  const std::vector<double> log_probs = log_softmax(logits);
  std::vector<double> grad(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    grad[j] = std::exp(log_probs[j]) - pseudo_label[j];
  }
  return grad;
}

std::vector<double> snapshot_logits(const ScoreModel& model,
                                    std::span<const Quadruple> queries) {
  if (queries.empty()) {
    throw EvalError("snapshot has no queries");
  }
  const std::size_t entity_count = model.num_entities();
  std::vector<double> logits(entity_count, 0.0);
  Quadruple candidate;
  for (const Quadruple& q : queries) {
    candidate = q;
    for (std::uint32_t j = 0; j < entity_count; ++j) {
      candidate.object = j;
      logits[j] += model.plausibility(candidate);
    }
  }
  const double inv = 1.0 / static_cast<double>(queries.size());
  for (double& v : logits) {
    v *= inv;
  }
  return logits;
}

TttResult ttt_adapt(ScoreModel model, const LstmPredictor& predictor,
                    const TkgDataset& dataset, const TttConfig& config) {
  config.validate();
  const std::size_t entity_count = dataset.num_entities();
  if (predictor.dims().input != entity_count) {
    throw ConfigError("predictor input dimension does not match the entity "
                      "vocabulary");
  }

  // Ordered test snapshot times.
  std::set<std::uint32_t> time_set;
  for (const Quadruple& q : dataset.split(Split::test)) {
    time_set.insert(q.time);
  }
  const std::vector<std::uint32_t> test_times(time_set.begin(),
                                              time_set.end());

  TttResult result{std::move(model), {}, 0, false};
  std::size_t horizon = config.horizon == 0
                            ? test_times.size()
                            : std::min(config.horizon, test_times.size());
  if (config.horizon > test_times.size() && config.horizon != 0) {
    result.truncated = true;
  }
  if (horizon == 0) {
    return result;
  }

  const SplitMask history_mask =
      config.include_validation_history ? (SplitMask::train | SplitMask::valid)
                                        : SplitMask::train;
  const std::uint32_t first_test = test_times.front();
  DistributionSeries history = DistributionSeries::over_range(
      dataset, 0, first_test, history_mask, config.mode);

  const std::size_t l = predictor.dims().seq_len;
  // Thin history before the first test snapshot is front-padded with uniform
  // vectors so a full window always exists.
  while (history.distributions.size() < l) {
    history.distributions.insert(
        history.distributions.begin(),
        std::vector<double>(entity_count, 1.0 / static_cast<double>(
                                                    entity_count)));
    history.uniform_filled.insert(history.uniform_filled.begin(), true);
  }

  // Which tensors the adaptation may touch.
  const auto& tensors = result.model.params().tensors();
  std::vector<bool> tensor_allowed(tensors.size(), true);
  if (config.subset == TttConfig::Subset::entity_embeddings) {
    tensor_allowed.assign(tensors.size(), false);
    for (const std::string& name : result.model.entity_tensor_names()) {
      tensor_allowed[result.model.params().tensor_index(name)] = true;
    }
  }

  Optimizer optimizer;  // plain descent on the masked subset

  for (std::size_t i = 0; i < horizon; ++i) {
    const std::uint32_t t = test_times[i];
    const std::span<const std::vector<double>> window(
        history.distributions.data() + (history.distributions.size() - l), l);
    const std::vector<double> pseudo_label = predictor.predict(window);

    const std::vector<Quadruple> queries = dataset.snapshot(t, SplitMask::test);
    const double query_scale = 1.0 / static_cast<double>(queries.size());

    for (std::size_t step = 0;; ++step) {
      const std::vector<double> logits =
          snapshot_logits(result.model, queries);
      const double loss = comparison_loss(logits, pseudo_label);
      result.trace.push_back({t, step, loss});
      if (step == config.steps) {
        break;
      }

      // dL/dtheta = sum_j dL/dP_j * dP_j/dtheta with
      // dP_j/dtheta = -mean_q grad E(s_q, p_q, j, t).
      const std::vector<double> d_logits =
          comparison_loss_grad(logits, pseudo_label);
      RowGradients grad;
      Quadruple candidate;
      for (const Quadruple& q : queries) {
        candidate = q;
        for (std::uint32_t j = 0; j < entity_count; ++j) {
          candidate.object = j;
          accumulate_subset(grad,
                            result.model.energy_gradient(candidate),
                            -d_logits[j] * query_scale, tensor_allowed);
        }
      }
      if (!grad.finite()) {
        throw NumericError("non-finite adaptation gradient");
      }
      if (!grad.empty()) {
        optimizer.apply(result.model, grad, config.learning_rate);
      }
    }

    history.distributions.push_back(
        entity_distribution(queries, entity_count, config.mode));
    history.uniform_filled.push_back(queries.empty());
    ++result.snapshots_adapted;
  }
  return result;
}

}  // namespace tkgr

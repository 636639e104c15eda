#include "tkgr/tkgan.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "tkgr/errors.hpp"

namespace tkgr {

namespace {

std::string json_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Discriminator (or target) MRR on a deterministic validation prefix.
std::optional<double> validation_mrr(const ScoreModel& model,
                                     const TkgDataset& dataset,
                                     RankingProtocol protocol,
                                     std::size_t max_queries) {
  const auto& valid = dataset.split(Split::valid);
  if (valid.empty() || max_queries == 0) {
    return std::nullopt;
  }
  const std::size_t n = std::min(valid.size(), max_queries);
  const EvalReport report = evaluate(
      model, std::span<const Quadruple>(valid.data(), n), dataset, protocol);
  return report.mrr;
}

/// Tracks best-so-far validation MRR; true once `patience` consecutive
/// checks fail to improve.
class PlateauDetector {
 public:
  explicit PlateauDetector(std::size_t patience) : patience_(patience) {}

  bool update(std::optional<double> val_mrr) {
    if (!val_mrr) {
      return false;
    }
    if (*val_mrr > best_ + 1e-9) {
      best_ = *val_mrr;
      streak_ = 0;
      return false;
    }
    ++streak_;
    return streak_ >= patience_;
  }

 private:
  std::size_t patience_;
  double best_ = -1.0;
  std::size_t streak_ = 0;
};

}  // namespace

NegativeSelection parse_negative_selection(std::string_view text) {
  if (text == "categorical") {
    return NegativeSelection::categorical;
  }
  if (text == "argmax") {
    return NegativeSelection::argmax;
  }
  throw ConfigError("unknown selection mode '" + std::string(text) + "'");
}

std::string_view to_string(NegativeSelection selection) {
  return selection == NegativeSelection::categorical ? "categorical"
                                                     : "argmax";
}

void AdversarialConfig::validate() const {
  if (!(margin > 0.0)) {
    throw ConfigError("margin must be positive");
  }
  if (candidate_count < 1) {
    throw ConfigError("candidate count must be at least 1");
  }
  if (!(generator_lr > 0.0) || !(discriminator_lr > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (batch_size < 1) {
    throw ConfigError("batch size must be at least 1");
  }
  if (reward_samples < 1) {
    throw ConfigError("reward samples must be at least 1");
  }
}

CandidateDistribution generator_distribution(const ScoreModel& generator,
                                             CandidateSet candidates) {
  if (candidates.size() == 0) {
    throw ConfigError("candidate set is empty");
  }
  CandidateDistribution dist;
  dist.candidates = std::move(candidates);
  dist.plausibilities.reserve(dist.candidates.size());
  for (const Quadruple& c : dist.candidates.candidates) {
    const double p = generator.plausibility(c);
    if (!std::isfinite(p)) {
      throw NumericError("non-finite generator score for a candidate");
    }
    dist.plausibilities.push_back(p);
  }

  const double max_score =
      *std::max_element(dist.plausibilities.begin(), dist.plausibilities.end());
  dist.probabilities.resize(dist.plausibilities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < dist.plausibilities.size(); ++i) {
    dist.probabilities[i] = std::exp(dist.plausibilities[i] - max_score);
    total += dist.probabilities[i];
  }
  for (double& p : dist.probabilities) {
    p /= total;
  }
  return dist;
}

NegativeChoice select_negative(const CandidateDistribution& distribution,
                               NegativeSelection mode, Rng& rng) {
  if (distribution.size() == 0) {
    throw ConfigError("cannot select from an empty distribution");
  }
  std::size_t index = 0;
  if (mode == NegativeSelection::categorical) {
    index = rng.categorical(distribution.probabilities);
  } else {
    for (std::size_t i = 1; i < distribution.size(); ++i) {
      if (distribution.probabilities[i] > distribution.probabilities[index]) {
        index = i;
      }
    }
  }
  return {index, std::log(distribution.probabilities[index])};
}

RowGradients log_prob_gradient(const ScoreModel& generator,
                               const CandidateDistribution& distribution,
                               std::size_t selected) {
  if (selected >= distribution.size()) {
    throw IndexError("selected candidate index out of range");
  }
  // log p_h = psi_h - logsumexp(psi), psi_i = -E(c_i):
  // grad = -grad E(c_h) + sum_i p_i grad E(c_i).
  RowGradients grad;
  grad.add_scaled(
      generator.energy_gradient(distribution.candidates.candidates[selected]),
      -1.0);
  for (std::size_t i = 0; i < distribution.size(); ++i) {
    grad.add_scaled(
        generator.energy_gradient(distribution.candidates.candidates[i]),
        distribution.probabilities[i]);
  }
  return grad;
}

double discriminator_step(TrainerState& state,
                          std::span<const TrainingPair> batch,
                          const AdversarialConfig& config,
                          Optimizer& optimizer) {
  if (batch.empty()) {
    throw ConfigError("discriminator batch is empty");
  }
  RowGradients grad;
  double loss = 0.0;
  for (const TrainingPair& pair : batch) {
    const double term = state.discriminator.energy(pair.positive) -
                        state.discriminator.energy(pair.negative) +
                        config.margin;
    if (term > 0.0) {
      loss += term;
      grad.add_scaled(state.discriminator.energy_gradient(pair.positive), 1.0);
      grad.add_scaled(state.discriminator.energy_gradient(pair.negative),
                      -1.0);
    }
  }
  if (!std::isfinite(loss) || !grad.finite()) {
    throw NumericError("non-finite discriminator loss or gradient");
  }
  if (!grad.empty()) {
    optimizer.apply(state.discriminator, grad, config.discriminator_lr);
  }
  return loss;
}

void generator_step(TrainerState& state, std::span<const PolicySample> batch,
                    const AdversarialConfig& config, Optimizer& optimizer) {
  if (batch.empty()) {
    throw ConfigError("generator batch is empty");
  }
  // Accumulate against the baseline from the previous batch, then update it.
  RowGradients grad;
  double reward_total = 0.0;
  const double sample_scale =
      1.0 / static_cast<double>(config.reward_samples);
  for (const PolicySample& sample : batch) {
    reward_total += sample.reward;
    grad.add_scaled(sample.log_prob_gradient,
                    (sample.reward - state.baseline) * sample_scale);
  }
  if (!std::isfinite(reward_total) || !grad.finite()) {
    throw NumericError("non-finite generator reward or gradient");
  }
  if (!grad.empty()) {
    optimizer.apply(state.generator, grad, config.generator_lr,
                    /*ascend=*/true);
  }
  state.last_batch_reward_total = reward_total;
  state.baseline = reward_total / static_cast<double>(batch.size());
}

std::string EpochMetrics::to_json_line() const {
  std::string line = "{\"epoch\":" + std::to_string(epoch);
  line += ",\"d_loss\":" + json_number(d_loss);
  line += ",\"mean_reward\":" + json_number(mean_reward);
  line += ",\"baseline\":" + json_number(baseline);
  line += ",\"val_mrr\":";
  line += val_mrr ? json_number(*val_mrr) : "null";
  line += ",\"seed\":" + std::to_string(seed) + "}";
  return line;
}

std::string MarginEpochMetrics::to_json_line() const {
  std::string line = "{\"epoch\":" + std::to_string(epoch);
  line += ",\"loss\":" + json_number(loss);
  line += ",\"val_mrr\":";
  line += val_mrr ? json_number(*val_mrr) : "null";
  line += ",\"seed\":" + std::to_string(seed) + "}";
  return line;
}

MarginTrainResult train_margin(ScoreModel& model, const TkgDataset& dataset,
                               const MarginTrainConfig& config,
                               const NegativeSource& negatives,
                               std::uint64_t seed) {
  const auto& train = dataset.split(Split::train);
  if (train.empty()) {
    throw EmptyDatasetError("margin training requires a train split");
  }

  Rng shuffle_rng(derive_stream_seed(seed, "margin/shuffle"));
  Rng sampler_rng(derive_stream_seed(seed, "margin/sampler"));
  Optimizer optimizer(config.optimizer);
  PlateauDetector plateau(config.patience);

  std::vector<std::uint32_t> order(train.size());
  std::iota(order.begin(), order.end(), 0u);

  MarginTrainResult result;
  ScoreModel last_good = model;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::uint32_t>(order));
    double epoch_loss = 0.0;
    try {
      for (std::size_t begin = 0; begin < order.size();
           begin += config.batch_size) {
        const std::size_t end =
            std::min(order.size(), begin + config.batch_size);
        RowGradients grad;
        for (std::size_t i = begin; i < end; ++i) {
          const Quadruple& g = train[order[i]];
          const Quadruple neg = negatives(g, sampler_rng);
          const double term =
              model.energy(g) - model.energy(neg) + config.margin;
          if (term > 0.0) {
            epoch_loss += term;
            grad.add_scaled(model.energy_gradient(g), 1.0);
            grad.add_scaled(model.energy_gradient(neg), -1.0);
          }
        }
        if (!std::isfinite(epoch_loss) || !grad.finite()) {
          throw NumericError("non-finite margin loss or gradient");
        }
        if (!grad.empty()) {
          optimizer.apply(model, grad, config.learning_rate);
        }
      }
    } catch (const NumericError&) {
      model = last_good;
      result.diverged = true;
      break;
    }

    MarginEpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.loss = epoch_loss / static_cast<double>(train.size());
    metrics.seed = seed;
    metrics.val_mrr = validation_mrr(model, dataset, config.protocol,
                                     config.max_validation_queries);
    result.metrics.push_back(metrics);
    last_good = model;

    if (plateau.update(metrics.val_mrr)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

TrainerState pretrain_adversarial(ModelKind generator_kind,
                                  ModelKind discriminator_kind,
                                  std::size_t dim, const TkgDataset& dataset,
                                  const AdversarialConfig& config,
                                  std::uint64_t seed) {
  config.validate();
  const RelationCardinality cardinality = RelationCardinality::compute(dataset);

  TrainerState state{
      ScoreModel::init(generator_kind, dataset.num_entities(),
                       dataset.num_relations(), dataset.num_timestamps(), dim,
                       derive_stream_seed(seed, "init/generator")),
      ScoreModel::init(discriminator_kind, dataset.num_entities(),
                       dataset.num_relations(), dataset.num_timestamps(), dim,
                       derive_stream_seed(seed, "init/discriminator")),
  };

  CorruptionOptions corruption;
  corruption.bern = config.bern;
  const NegativeSource uniform = [&](const Quadruple& g, Rng& rng) {
    return sample_random(g, dataset, cardinality, rng, corruption).quadruple;
  };

  MarginTrainConfig pretrain;
  pretrain.margin = config.margin;
  pretrain.batch_size = config.batch_size;
  pretrain.max_epochs = config.pretrain_epochs;
  pretrain.patience = config.pretrain_epochs + 1;  // no early stop
  pretrain.max_validation_queries = 0;             // skip validation scoring
  pretrain.optimizer = config.optimizer;
  pretrain.protocol = config.protocol;

  pretrain.learning_rate = config.generator_lr;
  train_margin(state.generator, dataset, pretrain, uniform,
               derive_stream_seed(seed, "pretrain/generator"));
  pretrain.learning_rate = config.discriminator_lr;
  train_margin(state.discriminator, dataset, pretrain, uniform,
               derive_stream_seed(seed, "pretrain/discriminator"));
  return state;
}

Stage1Result adversarial_epochs(TrainerState state, const TkgDataset& dataset,
                                const AdversarialConfig& config,
                                std::uint64_t seed) {
  config.validate();
  const auto& train = dataset.split(Split::train);
  if (train.empty()) {
    throw EmptyDatasetError("adversarial training requires a train split");
  }
  const RelationCardinality cardinality = RelationCardinality::compute(dataset);

  Rng shuffle_rng(derive_stream_seed(seed, "stage1/shuffle"));
  Rng sampler_rng(derive_stream_seed(seed, "stage1/sampler"));
  Rng select_rng(derive_stream_seed(seed, "stage1/select"));
  Optimizer generator_opt(config.optimizer);
  Optimizer discriminator_opt(config.optimizer);
  PlateauDetector plateau(config.patience);

  CorruptionOptions corruption;
  corruption.bern = config.bern;
  corruption.filter_known = config.filter_known;

  std::vector<std::uint32_t> order(train.size());
  std::iota(order.begin(), order.end(), 0u);

  Stage1Result result{std::move(state), {}, false, false};
  TrainerState last_good = result.state;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::uint32_t>(order));
    double epoch_loss = 0.0;
    double epoch_reward = 0.0;
    std::size_t pair_count = 0;

    try {
      for (std::size_t begin = 0; begin < order.size();
           begin += config.batch_size) {
        const std::size_t end =
            std::min(order.size(), begin + config.batch_size);
        std::vector<TrainingPair> pairs;
        std::vector<PolicySample> samples;
        pairs.reserve((end - begin) * config.reward_samples);
        samples.reserve(pairs.capacity());

        for (std::size_t i = begin; i < end; ++i) {
          const Quadruple& g = train[order[i]];
          CandidateDistribution dist = generator_distribution(
              result.state.generator,
              build_candidates(g, config.candidate_count, dataset, cardinality,
                               sampler_rng, corruption));
          for (std::size_t n = 0; n < config.reward_samples; ++n) {
            const NegativeChoice choice =
                select_negative(dist, config.selection, select_rng);
            const Quadruple& neg =
                dist.candidates.candidates[choice.index];
            pairs.push_back({g, neg});
            PolicySample sample;
            sample.reward = -result.state.discriminator.energy(neg);
            sample.log_prob_gradient =
                log_prob_gradient(result.state.generator, dist, choice.index);
            samples.push_back(std::move(sample));
          }
        }

        epoch_loss += discriminator_step(result.state, pairs, config,
                                         discriminator_opt);
        generator_step(result.state, samples, config, generator_opt);
        for (const PolicySample& s : samples) {
          epoch_reward += s.reward;
        }
        pair_count += pairs.size();
        assert(result.state.baseline ==
               result.state.last_batch_reward_total /
                   static_cast<double>(samples.size()));
      }
    } catch (const NumericError&) {
      result.state = last_good;
      result.diverged = true;
      break;
    }

    result.state.epoch = epoch;
    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.d_loss =
        pair_count > 0 ? epoch_loss / static_cast<double>(pair_count) : 0.0;
    metrics.mean_reward =
        pair_count > 0 ? epoch_reward / static_cast<double>(pair_count) : 0.0;
    metrics.baseline = result.state.baseline;
    metrics.seed = seed;
    metrics.val_mrr =
        validation_mrr(result.state.discriminator, dataset, config.protocol,
                       config.max_validation_queries);
    result.metrics.push_back(metrics);
    last_good = result.state;

    if (plateau.update(metrics.val_mrr)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

Stage1Result train_stage1(ModelKind generator_kind,
                          ModelKind discriminator_kind, std::size_t dim,
                          const TkgDataset& dataset,
                          const AdversarialConfig& config,
                          std::uint64_t seed) {
  TrainerState state = pretrain_adversarial(generator_kind, discriminator_kind,
                                            dim, dataset, config, seed);
  return adversarial_epochs(std::move(state), dataset, config, seed);
}

Stage2Result train_stage2(const ScoreModel& frozen_generator,
                          ModelKind target_kind, std::size_t dim,
                          const TkgDataset& dataset,
                          const AdversarialConfig& config,
                          std::uint64_t seed) {
  config.validate();
  const RelationCardinality cardinality = RelationCardinality::compute(dataset);

  CorruptionOptions corruption;
  corruption.bern = config.bern;
  corruption.filter_known = config.filter_known;

  // Negatives are selected by the frozen generator from fresh uniform
  // candidate sets; the generator is never updated here.
  const NegativeSource from_generator = [&](const Quadruple& g, Rng& rng) {
    CandidateDistribution dist = generator_distribution(
        frozen_generator,
        build_candidates(g, config.candidate_count, dataset, cardinality, rng,
                         corruption));
    const NegativeChoice choice =
        select_negative(dist, config.selection, rng);
    return dist.candidates.candidates[choice.index];
  };

  MarginTrainConfig margin;
  margin.margin = config.margin;
  margin.learning_rate = config.discriminator_lr;
  margin.batch_size = config.batch_size;
  margin.max_epochs = config.max_epochs;
  margin.patience = config.patience;
  margin.max_validation_queries = config.max_validation_queries;
  margin.optimizer = config.optimizer;
  margin.protocol = config.protocol;

  Stage2Result result{
      ScoreModel::init(target_kind, dataset.num_entities(),
                       dataset.num_relations(), dataset.num_timestamps(), dim,
                       derive_stream_seed(seed, "init/target")),
      {},
  };
  MarginTrainResult train = train_margin(result.target, dataset, margin,
                                         from_generator,
                                         derive_stream_seed(seed, "stage2"));
  result.metrics = std::move(train.metrics);
  result.converged = train.converged;
  result.diverged = train.diverged;
  return result;
}

}  // namespace tkgr

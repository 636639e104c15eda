#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tkgr/dataset.hpp"
#include "tkgr/eval.hpp"
#include "tkgr/sampling.hpp"
#include "tkgr/score_model.hpp"

namespace tkgr {

enum class NegativeSelection : std::uint8_t { categorical, argmax };

NegativeSelection parse_negative_selection(std::string_view text);
std::string_view to_string(NegativeSelection selection);

struct AdversarialConfig {
  double margin = 1.0;             // hinge offset
  std::size_t candidate_count = 64;
  double generator_lr = 1e-3;
  double discriminator_lr = 1e-3;
  std::size_t batch_size = 512;
  std::size_t max_epochs = 1000;
  NegativeSelection selection = NegativeSelection::categorical;
  std::size_t pretrain_epochs = 5;
  std::size_t patience = 3;        // validation-MRR plateau checks
  std::size_t reward_samples = 1;  // negatives drawn per positive per step
  bool bern = true;
  bool filter_known = false;
  std::size_t max_validation_queries = 2000;
  OptimizerConfig optimizer;
  RankingProtocol protocol = RankingProtocol::time_aware_filtered;

  void validate() const;
};

/// Softmax distribution over a candidate set, built from generator
/// plausibilities (-energy) with max-subtraction.
struct CandidateDistribution {
  CandidateSet candidates;
  std::vector<double> plausibilities;
  std::vector<double> probabilities;

  std::size_t size() const noexcept { return probabilities.size(); }
};

CandidateDistribution generator_distribution(const ScoreModel& generator,
                                             CandidateSet candidates);

struct NegativeChoice {
  std::size_t index = 0;
  double log_probability = 0.0;
};

/// Categorical mode draws index i with probability p_i; argmax mode picks the
/// most probable candidate, ties broken by lowest index.
NegativeChoice select_negative(const CandidateDistribution& distribution,
                               NegativeSelection mode, Rng& rng);

/// Gradient of log p(selected) with respect to the generator parameters:
/// grad log p_h = -grad E(c_h) + sum_i p_i grad E(c_i).
RowGradients log_prob_gradient(const ScoreModel& generator,
                               const CandidateDistribution& distribution,
                               std::size_t selected);

/// Adversarial trainer state: generator, discriminator, and the policy
/// baseline. The baseline always equals the mean reward of the most recent
/// generator batch.
struct TrainerState {
  ScoreModel generator;
  ScoreModel discriminator;
  double baseline = 0.0;
  double last_batch_reward_total = 0.0;
  std::size_t epoch = 0;
};

struct TrainingPair {
  Quadruple positive;
  Quadruple negative;
};

/// One margin update of the discriminator over a batch of (positive,
/// negative) pairs. Returns the batch hinge loss; inactive pairs contribute
/// zero loss and zero gradient.
double discriminator_step(TrainerState& state,
                          std::span<const TrainingPair> batch,
                          const AdversarialConfig& config,
                          Optimizer& optimizer);

/// One policy-gradient sample: the reward r = -E_D(negative) and the gradient
/// of log p(selected) with respect to the generator parameters.
struct PolicySample {
  double reward = 0.0;
  RowGradients log_prob_gradient;
};

/// Ascends sum_i (r_i - b) grad log p_i, then resets the baseline to the
/// batch mean reward.
void generator_step(TrainerState& state, std::span<const PolicySample> batch,
                    const AdversarialConfig& config, Optimizer& optimizer);

struct EpochMetrics {
  std::size_t epoch = 0;
  double d_loss = 0.0;
  double mean_reward = 0.0;
  double baseline = 0.0;
  std::optional<double> val_mrr;
  std::uint64_t seed = 0;

  std::string to_json_line() const;
};

struct Stage1Result {
  TrainerState state;
  std::vector<EpochMetrics> metrics;
  bool converged = false;
  bool diverged = false;
};

/// Initializes generator and discriminator and margin-trains both briefly
/// with uniform negatives; these are the pre-trained inputs of the
/// adversarial loop.
TrainerState pretrain_adversarial(ModelKind generator_kind,
                                  ModelKind discriminator_kind,
                                  std::size_t dim, const TkgDataset& dataset,
                                  const AdversarialConfig& config,
                                  std::uint64_t seed);

/// Runs the adversarial loop on an already pre-trained state until the epoch
/// cap or a validation-MRR plateau. On divergence the last epoch-end state is
/// restored and `diverged` is set.
Stage1Result adversarial_epochs(TrainerState state, const TkgDataset& dataset,
                                const AdversarialConfig& config,
                                std::uint64_t seed);

/// Stage 1 of the two-stage pipeline: pretraining plus adversarial epochs.
Stage1Result train_stage1(ModelKind generator_kind,
                          ModelKind discriminator_kind, std::size_t dim,
                          const TkgDataset& dataset,
                          const AdversarialConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Margin training with a pluggable negative source. Used for the RNS/TaNS
// strategies, pretraining, and stage 2.
// ---------------------------------------------------------------------------

using NegativeSource = std::function<Quadruple(const Quadruple&, Rng&)>;

struct MarginTrainConfig {
  double margin = 1.0;
  double learning_rate = 1e-3;
  std::size_t batch_size = 512;
  std::size_t max_epochs = 1000;
  std::size_t patience = 3;
  std::size_t max_validation_queries = 2000;
  OptimizerConfig optimizer;
  RankingProtocol protocol = RankingProtocol::time_aware_filtered;
};

struct MarginEpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::optional<double> val_mrr;
  std::uint64_t seed = 0;

  std::string to_json_line() const;
};

struct MarginTrainResult {
  std::vector<MarginEpochMetrics> metrics;
  bool converged = false;
  bool diverged = false;
};

MarginTrainResult train_margin(ScoreModel& model, const TkgDataset& dataset,
                               const MarginTrainConfig& config,
                               const NegativeSource& negatives,
                               std::uint64_t seed);

struct Stage2Result {
  ScoreModel target;
  std::vector<MarginEpochMetrics> metrics;
  bool converged = false;
  bool diverged = false;
};

/// Stage 2: margin-trains a fresh target model whose negatives are selected
/// by the frozen stage-1 generator from uniformly drawn candidate sets.
Stage2Result train_stage2(const ScoreModel& frozen_generator,
                          ModelKind target_kind, std::size_t dim,
                          const TkgDataset& dataset,
                          const AdversarialConfig& config, std::uint64_t seed);

}  // namespace tkgr

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tkgr/distribution.hpp"
#include "tkgr/eval.hpp"
#include "tkgr/lstm.hpp"
#include "tkgr/score_model.hpp"
#include "tkgr/stats.hpp"
#include "tkgr/tkgan.hpp"
#include "tkgr/ttt.hpp"

namespace tkgr {

enum class SamplingStrategy : std::uint8_t { rns, tans, tkgan };

SamplingStrategy parse_sampling_strategy(std::string_view text);
std::string_view to_string(SamplingStrategy strategy);

/// Effective run configuration. Defaults here; values from a flat
/// `key = value` config file and CLI overrides layered on top (later wins).
/// Unknown keys are rejected.
struct RunConfig {
  // data.*
  std::string data_path;
  std::int64_t interval = 1;
  std::string interval_unit = "steps";

  // model.*
  ModelKind model_kind = ModelKind::translate_time;
  ModelKind generator_kind = ModelKind::translate_time;
  std::size_t dim = 64;

  // train.*
  SamplingStrategy strategy = SamplingStrategy::rns;
  double margin = 1.0;
  std::size_t candidates = 64;
  double lr = 1e-3;
  double generator_lr = 1e-3;
  double discriminator_lr = 1e-3;
  std::size_t batch_size = 512;
  std::size_t max_epochs = 1000;
  std::size_t pretrain_epochs = 5;
  NegativeSelection selection = NegativeSelection::categorical;
  std::size_t patience = 3;
  std::size_t reward_samples = 1;
  bool bern = true;
  bool filter_known = false;
  OptimizerKind optimizer = OptimizerKind::sgd;
  std::uint32_t tans_window = 1;
  std::size_t val_queries = 2000;

  // ttt.*
  double ttt_lr = 0.5;
  std::size_t ttt_steps = 1;
  std::size_t ttt_horizon = 0;  // 0 = all test snapshots
  TttConfig::Subset ttt_subset = TttConfig::Subset::entity_embeddings;
  CountMode ttt_mode = CountMode::object_only;
  std::size_t ttt_seq_len = LstmPredictor::kDefaultSeqLen;
  std::size_t ttt_hidden = 64;
  bool ttt_include_valid = true;
  std::size_t ttt_fit_epochs = 200;
  double ttt_fit_lr = 1e-3;

  // eval.*
  RankingProtocol protocol = RankingProtocol::time_aware_filtered;

  // shift.*
  std::uint32_t shift_window = 1;
  ShiftMode shift_mode = ShiftMode::relation;

  // globals
  std::uint64_t seed = 42;
  unsigned workers = 1;
  std::string out_dir = "out";

  /// Applies one `key = value` assignment. Throws ConfigError on unknown
  /// keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Reads a flat key = value file ('#' comments and blank lines allowed).
  void load_file(const std::filesystem::path& file);

  /// Range checks across all fields.
  void validate() const;

  /// Canonical `key = value` text with every default resolved; suitable for
  /// bit-exact reproduction of the run.
  std::string resolved() const;

  AdversarialConfig adversarial() const;
  MarginTrainConfig margin_config() const;
  TttConfig ttt() const;
};

}  // namespace tkgr

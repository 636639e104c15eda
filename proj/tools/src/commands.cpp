#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "tkgr/errors.hpp"

namespace tkgr::cli {

namespace fs = std::filesystem;

namespace {

/// Resolves the dataset path, falling back to $TKGR_FORGE_DATA as the root
/// for relative paths that do not exist as given.
fs::path resolve_data_path(const RunConfig& config) {
  if (config.data_path.empty()) {
    throw ConfigError("no dataset path configured (data.path / --data)");
  }
  fs::path path(config.data_path);
  if (fs::exists(path)) {
    return path;
  }
  if (const char* root = std::getenv("TKGR_FORGE_DATA");
      root != nullptr && path.is_relative()) {
    const fs::path under_root = fs::path(root) / path;
    if (fs::exists(under_root)) {
      return under_root;
    }
  }
  throw ConfigError("dataset path not found: " + config.data_path);
}

TkgDataset open_dataset(const RunConfig& config) {
  const fs::path path = resolve_data_path(config);
  if (fs::is_regular_file(path)) {
    return TkgDataset::load_cache(path);
  }
  return TkgDataset::load(path,
                          TimeInterval{config.interval, config.interval_unit});
}

fs::path prepare_out_dir(const RunConfig& config) {
  const fs::path out(config.out_dir);
  fs::create_directories(out);
  std::ofstream resolved(out / "config.resolved");
  resolved << config.resolved();
  return out;
}

void print_dataset_stats(const TkgDataset& dataset) {
  std::cout << "entities:   " << dataset.num_entities() << "\n"
            << "relations:  " << dataset.num_relations() << "\n"
            << "timestamps: " << dataset.num_timestamps() << "\n"
            << "train:      " << dataset.split(Split::train).size() << "\n"
            << "valid:      " << dataset.split(Split::valid).size() << "\n"
            << "test:       " << dataset.split(Split::test).size() << "\n"
            << "interval:   " << dataset.interval().length << " "
            << dataset.interval().unit << "\n";
}

Split parse_split(const std::string& name) {
  if (name == "train") {
    return Split::train;
  }
  if (name == "valid") {
    return Split::valid;
  }
  if (name == "test") {
    return Split::test;
  }
  throw ConfigError("unknown split '" + name + "'");
}

template <typename Metrics>
void write_jsonl(const fs::path& file, const std::vector<Metrics>& metrics) {
  std::ofstream out(file);
  for (const Metrics& m : metrics) {
    out << m.to_json_line() << "\n";
  }
}

EvalReport run_eval(const ScoreModel& model, const TkgDataset& dataset,
                    const RunConfig& config, Split split) {
  const auto& facts = dataset.split(split);
  return evaluate(model, facts, dataset, config.protocol, config.workers);
}

/// Longest consecutive timestamp range covered by the train split; the
/// distribution series the predictor is fitted on.
DistributionSeries training_series(const TkgDataset& dataset,
                                   const RunConfig& config) {
  std::uint32_t last_train = 0;
  for (const Quadruple& q : dataset.split(Split::train)) {
    last_train = std::max(last_train, q.time);
  }
  return DistributionSeries::over_range(dataset, 0, last_train + 1,
                                        SplitMask::train, config.ttt_mode);
}

}  // namespace

int cmd_ingest(const RunConfig& config) {
  const fs::path path = resolve_data_path(config);
  if (!fs::is_directory(path)) {
    throw ConfigError("ingest expects a dataset directory, got " +
                      path.string());
  }
  const TkgDataset dataset = TkgDataset::load(
      path, TimeInterval{config.interval, config.interval_unit});
  const fs::path out = prepare_out_dir(config);
  const fs::path cache = out / "dataset.tkgd";
  dataset.save_cache(cache);
  print_dataset_stats(dataset);
  std::cout << "cache:      " << cache.string() << "\n";
  return kExitOk;
}

int cmd_train(const RunConfig& config) {
  const TkgDataset dataset = open_dataset(config);
  const fs::path out = prepare_out_dir(config);

  if (config.strategy == SamplingStrategy::tkgan) {
    const AdversarialConfig adv = config.adversarial();
    Stage1Result stage1 = train_stage1(config.generator_kind,
                                       config.model_kind, config.dim, dataset,
                                       adv, config.seed);
    stage1.state.generator.save(out / "generator.tkgm");
    stage1.state.discriminator.save(out / "discriminator.tkgm");
    write_jsonl(out / "metrics.jsonl", stage1.metrics);
    if (stage1.diverged) {
      std::cerr << "stage 1 diverged; last good checkpoints retained\n";
      return kExitRuntime;
    }

    Stage2Result stage2 =
        train_stage2(stage1.state.generator, config.model_kind, config.dim,
                     dataset, adv, config.seed);
    stage2.target.save(out / "target.tkgm");
    write_jsonl(out / "target_metrics.jsonl", stage2.metrics);
    if (stage2.diverged) {
      std::cerr << "stage 2 diverged; last good checkpoint retained\n";
      return kExitRuntime;
    }
    std::cout << "checkpoints: generator.tkgm discriminator.tkgm target.tkgm"
              << "\n";
    return kExitOk;
  }

  // Plain margin training with random or time-aware negatives.
  const RelationCardinality cardinality = RelationCardinality::compute(dataset);
  CorruptionOptions corruption;
  corruption.bern = config.bern;
  corruption.window = config.tans_window;
  const bool time_aware = config.strategy == SamplingStrategy::tans;
  const NegativeSource negatives = [&](const Quadruple& g, Rng& rng) {
    return time_aware
               ? sample_time_aware(g, dataset, cardinality, rng, corruption)
                     .quadruple
               : sample_random(g, dataset, cardinality, rng, corruption)
                     .quadruple;
  };

  ScoreModel target = ScoreModel::init(
      config.model_kind, dataset.num_entities(), dataset.num_relations(),
      dataset.num_timestamps(), config.dim,
      derive_stream_seed(config.seed, "init/target"));
  const MarginTrainResult result =
      train_margin(target, dataset, config.margin_config(), negatives,
                   derive_stream_seed(config.seed, "train"));
  target.save(out / "target.tkgm");
  write_jsonl(out / "target_metrics.jsonl", result.metrics);
  if (result.diverged) {
    std::cerr << "training diverged; last good checkpoint retained\n";
    return kExitRuntime;
  }
  std::cout << "checkpoints: target.tkgm\n";
  return kExitOk;
}

int cmd_fit_dist(const RunConfig& config) {
  const TkgDataset dataset = open_dataset(config);
  const fs::path out = prepare_out_dir(config);

  const DistributionSeries series = training_series(dataset, config);
  LstmPredictor predictor = LstmPredictor::init(
      {dataset.num_entities(), config.ttt_hidden, config.ttt_seq_len},
      derive_stream_seed(config.seed, "ttt/init"));
  const double final_loss =
      predictor.fit(series, {config.ttt_fit_epochs, config.ttt_fit_lr});
  predictor.save(out / "predictor.tkgp");
  std::cout << "series length: " << series.size() << "\n"
            << "final loss:    " << final_loss << "\n"
            << "predictor:     " << (out / "predictor.tkgp").string() << "\n";
  return kExitOk;
}

int cmd_adapt(const RunConfig& config, const std::string& target_path,
              const std::string& predictor_path) {
  if (!fs::exists(target_path)) {
    throw ConfigError("target checkpoint not found: " + target_path);
  }
  if (!fs::exists(predictor_path)) {
    throw ConfigError("predictor not found: " + predictor_path);
  }
  const TkgDataset dataset = open_dataset(config);
  const fs::path out = prepare_out_dir(config);

  ScoreModel target = ScoreModel::load(target_path);
  const LstmPredictor predictor = LstmPredictor::load(predictor_path);

  const EvalReport before = run_eval(target, dataset, config, Split::test);
  {
    std::ofstream file(out / "eval_before.json");
    file << before.to_json() << "\n";
  }

  TttResult adapted = ttt_adapt(std::move(target), predictor, dataset,
                                config.ttt());
  if (adapted.truncated) {
    std::cerr << "warning: horizon truncated to " << adapted.snapshots_adapted
              << " available test snapshots\n";
  }
  {
    std::ofstream trace(out / "adapt_trace.jsonl");
    for (const AdaptTraceEntry& entry : adapted.trace) {
      trace << entry.to_json_line() << "\n";
    }
  }
  adapted.model.save(out / "adapted.tkgm");

  const EvalReport after = run_eval(adapted.model, dataset, config,
                                    Split::test);
  {
    std::ofstream file(out / "eval_after.json");
    file << after.to_json() << "\n";
  }

  std::cout << "before: " << before.to_json() << "\n"
            << "after:  " << after.to_json() << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& config, const std::string& checkpoint_path,
             const std::string& split_name) {
  if (!fs::exists(checkpoint_path)) {
    throw ConfigError("checkpoint not found: " + checkpoint_path);
  }
  const TkgDataset dataset = open_dataset(config);
  const fs::path out = prepare_out_dir(config);

  const ScoreModel model = ScoreModel::load(checkpoint_path);
  const EvalReport report =
      run_eval(model, dataset, config, parse_split(split_name));
  {
    std::ofstream file(out / "eval.json");
    file << report.to_json() << "\n";
  }
  std::cout << report.to_json() << "\n";
  return kExitOk;
}

int cmd_analyze_shift(const RunConfig& config) {
  const TkgDataset dataset = open_dataset(config);
  const fs::path out = prepare_out_dir(config);

  const ShiftReport report =
      analyze_shift(dataset, config.shift_window, config.shift_mode);
  for (const ShiftWindow& w : report.skipped) {
    std::cerr << "warning: window t" << w.first_time << "-t" << w.last_time
              << " has no facts; skipped\n";
  }
  {
    std::ofstream csv(out / "shift.csv");
    report.write_csv(csv);
  }
  report.write_csv(std::cout);
  return kExitOk;
}

int cmd_sample_neg(const RunConfig& config, const std::string& split_name,
                   std::size_t limit) {
  const TkgDataset dataset = open_dataset(config);
  const RelationCardinality cardinality = RelationCardinality::compute(dataset);
  const Split split = parse_split(split_name);
  const auto& facts = dataset.split(split);

  CorruptionOptions corruption;
  corruption.bern = config.bern;
  corruption.filter_known = config.filter_known;
  Rng rng(derive_stream_seed(config.seed, "sample-neg"));

  const std::size_t count = std::min(limit, facts.size());
  for (std::size_t i = 0; i < count; ++i) {
    const CandidateSet set = build_candidates(
        facts[i], config.candidates, dataset, cardinality, rng, corruption);
    for (std::size_t c = 0; c < set.size(); ++c) {
      const Quadruple& q = set.candidates[c];
      std::cout << dataset.entities().label(q.subject) << "\t"
                << dataset.relations().label(q.predicate) << "\t"
                << dataset.entities().label(q.object) << "\t"
                << dataset.raw_time(q.time) << "\t"
                << (set.slots[c] == CorruptionSlot::head ? "head" : "tail")
                << "\n";
    }
  }
  return kExitOk;
}

}  // namespace tkgr::cli

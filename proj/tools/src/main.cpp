#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "tkgr/errors.hpp"

namespace {

using tkgr::RunConfig;
using tkgr::cli::kExitRuntime;
using tkgr::cli::kExitUsage;

struct CommonArgs {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flag_overrides;
};

/// Registers the options every subcommand shares. Dedicated flags are sugar
/// over config keys and are applied after --set pairs.
void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "flat key = value config file");
  cmd->add_option("--set", args.sets,
                  "override a config key, e.g. --set train.margin=2.0");
  const auto forward = [&args](const std::string& key) {
    return [&args, key](const std::string& value) {
      args.flag_overrides.emplace_back(key, value);
    };
  };
  cmd->add_option_function<std::string>("--data", forward("data.path"),
                                        "dataset directory or .tkgd cache");
  cmd->add_option_function<std::string>("--seed", forward("seed"),
                                        "global random seed");
  cmd->add_option_function<std::string>("--workers", forward("workers"),
                                        "worker threads for evaluation");
  cmd->add_option_function<std::string>("--out", forward("out"),
                                        "output directory");
}

RunConfig build_config(const CommonArgs& args) {
  RunConfig config;
  if (!args.config_file.empty()) {
    config.load_file(args.config_file);
  }
  for (const std::string& assignment : args.sets) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
      throw tkgr::ConfigError("--set expects key=value, got '" + assignment +
                              "'");
    }
    config.set(assignment.substr(0, eq), assignment.substr(eq + 1));
  }
  for (const auto& [key, value] : args.flag_overrides) {
    config.set(key, value);
  }
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tkgr-forge: temporal knowledge-graph training and evaluation"};
  app.require_subcommand(1);

  CommonArgs common;

  auto* ingest = app.add_subcommand(
      "ingest", "parse raw split files and write the canonical cache");
  add_common(ingest, common);
  ingest->add_option_function<std::string>(
      "--interval",
      [&common](const std::string& v) {
        common.flag_overrides.emplace_back("data.interval", v);
      },
      "raw time units per timestamp step");
  ingest->add_option_function<std::string>(
      "--interval-unit",
      [&common](const std::string& v) {
        common.flag_overrides.emplace_back("data.interval_unit", v);
      },
      "interval unit label, e.g. hours");

  auto* train = app.add_subcommand("train", "train a score model");
  add_common(train, common);
  train->add_option_function<std::string>(
      "--strategy",
      [&common](const std::string& v) {
        common.flag_overrides.emplace_back("train.strategy", v);
      },
      "negative sampling strategy: rns | tans | tkgan");

  auto* fit_dist = app.add_subcommand(
      "fit-dist", "fit the entity-distribution predictor on train snapshots");
  add_common(fit_dist, common);
  fit_dist->add_option_function<std::string>(
      "--seq-len",
      [&common](const std::string& v) {
        common.flag_overrides.emplace_back("ttt.seq_len", v);
      },
      "LSTM input sequence length");
  fit_dist->add_option_function<std::string>(
      "--epochs",
      [&common](const std::string& v) {
        common.flag_overrides.emplace_back("ttt.fit_epochs", v);
      },
      "fitting epochs");

  std::string target_path;
  std::string predictor_path;
  auto* adapt = app.add_subcommand(
      "adapt", "test-time adaptation; evaluates before and after");
  add_common(adapt, common);
  adapt->add_option("--target", target_path, "target model checkpoint")
      ->required();
  adapt->add_option("--predictor", predictor_path, "fitted .tkgp predictor")
      ->required();
  adapt->add_option_function<std::string>(
      "--steps",
      [&common](const std::string& v) {
        common.flag_overrides.emplace_back("ttt.steps", v);
      },
      "adaptation steps per snapshot");
  adapt->add_option_function<std::string>(
      "--horizon",
      [&common](const std::string& v) {
        common.flag_overrides.emplace_back("ttt.horizon", v);
      },
      "number of test snapshots to adapt over (0 = all)");

  std::string checkpoint_path;
  std::string split_name = "test";
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  add_common(eval, common);
  eval->add_option("--checkpoint", checkpoint_path, "model checkpoint")
      ->required();
  eval->add_option("--split", split_name, "train | valid | test");
  eval->add_option_function<std::string>(
      "--protocol",
      [&common](const std::string& v) {
        common.flag_overrides.emplace_back("eval.protocol", v);
      },
      "raw | filtered");

  auto* shift = app.add_subcommand(
      "analyze-shift", "KS and U tests between adjacent snapshot windows");
  add_common(shift, common);
  shift->add_option_function<std::string>(
      "--window",
      [&common](const std::string& v) {
        common.flag_overrides.emplace_back("shift.window", v);
      },
      "snapshots per window");
  shift->add_option_function<std::string>(
      "--mode",
      [&common](const std::string& v) {
        common.flag_overrides.emplace_back("shift.mode", v);
      },
      "relation | entity");

  std::string neg_split = "train";
  std::size_t neg_limit = 10;
  auto* sample_neg = app.add_subcommand(
      "sample-neg", "emit candidate negatives for the first positives");
  add_common(sample_neg, common);
  sample_neg->add_option("--split", neg_split, "source split");
  sample_neg->add_option("--limit", neg_limit, "number of positives");
  sample_neg->add_option_function<std::string>(
      "--k",
      [&common](const std::string& v) {
        common.flag_overrides.emplace_back("train.candidates", v);
      },
      "candidates per positive");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const RunConfig config = build_config(common);
    if (ingest->parsed()) {
      return tkgr::cli::cmd_ingest(config);
    }
    if (train->parsed()) {
      return tkgr::cli::cmd_train(config);
    }
    if (fit_dist->parsed()) {
      return tkgr::cli::cmd_fit_dist(config);
    }
    if (adapt->parsed()) {
      return tkgr::cli::cmd_adapt(config, target_path, predictor_path);
    }
    if (eval->parsed()) {
      return tkgr::cli::cmd_eval(config, checkpoint_path, split_name);
    }
    if (shift->parsed()) {
      return tkgr::cli::cmd_analyze_shift(config);
    }
    if (sample_neg->parsed()) {
      return tkgr::cli::cmd_sample_neg(config, neg_split, neg_limit);
    }
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const tkgr::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tkgr::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tkgr::EmptyDatasetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tkgr::GranularityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tkgr::ContainerError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

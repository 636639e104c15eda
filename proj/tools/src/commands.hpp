#pragma once

#include <string>

#include "tkgr/quadruple.hpp"
#include "tkgr/run_config.hpp"

namespace tkgr::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

int cmd_ingest(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_fit_dist(const RunConfig& config);
int cmd_adapt(const RunConfig& config, const std::string& target_path,
              const std::string& predictor_path);
int cmd_eval(const RunConfig& config, const std::string& checkpoint_path,
             const std::string& split_name);
int cmd_analyze_shift(const RunConfig& config);
int cmd_sample_neg(const RunConfig& config, const std::string& split_name,
                   std::size_t limit);

}  // namespace tkgr::cli

#pragma once

#include <string>
#include <vector>

#include "stressfuse/cli/config.hpp"

namespace stressfuse::cli {

// Each command reads its upstream artifacts from cfg.out and writes its own
// there. Return value is the process exit code.
int cmd_synth(const ExperimentConfig& cfg);
int cmd_features(const ExperimentConfig& cfg);
int cmd_select(const ExperimentConfig& cfg, bool all_selectors);
int cmd_train(const ExperimentConfig& cfg);
int cmd_eval(const ExperimentConfig& cfg, bool all_models, bool all_selectors);
int cmd_explain(const ExperimentConfig& cfg);
int cmd_report(const ExperimentConfig& cfg);

// Parses arguments and dispatches; errors are printed and mapped to exit 2.
int run_cli(int argc, const char* const* argv);

}  // namespace stressfuse::cli

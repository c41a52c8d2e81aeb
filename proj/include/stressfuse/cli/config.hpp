#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "stressfuse/eval/eval.hpp"
#include "stressfuse/featex/windows.hpp"
#include "stressfuse/sigcore/synth.hpp"

namespace stressfuse::cli {

// One JSON document describing a run. Fields absent from a config file keep
// their defaults; command-line flags override both.
//
// {
//   "data":      {"corpus": "<dir or empty>", "synth": {...}},
//   "window":    {"window_s": 40, "step_s": 20},
//   "features":  {"preset": "fused-paper", "no_eda_components": false},
//   "selection": {"method": "lasso", "k_bio": 30, "k_lnd": 100, "k_fused": 100, "forest": {...}},
//   "fusion":    {"family": "early", "kind": "cnn1d", ...},
//   "train":     {"epochs": 60, ...},
//   "explain":   {"lambda_ratio": 0.1, "subject": ""},
//   "seed": 1, "parallelism": 1, "out": "out"
// }
struct ExperimentConfig {
  std::string corpus;  // empty: use <out>/corpus written by `synth`
  sigcore::SynthSpec synth;
  featex::WindowSpec window;
  std::string preset = "fused-paper";
  bool no_eda_components = false;
  eval::ExperimentSpec experiment;
  double explain_lambda_ratio = 0.1;
  std::string explain_subject;  // empty: first subject
  std::filesystem::path out = "out";

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);

  // Hash of the whole config, and of the part that determines the feature
  // matrix (used to detect stale feature files).
  std::string digest() const;
  std::string feature_digest() const;
};

}  // namespace stressfuse::cli

#include "stressfuse/cli/config.hpp"

#include <fstream>

#include "stressfuse/common/digest.hpp"
#include "stressfuse/common/error.hpp"
#include "stressfuse/featex/manifest.hpp"
#include "stressfuse/select/select.hpp"

namespace stressfuse::cli {

void ExperimentConfig::validate() const {
  if (corpus.empty()) synth.validate();
  window.validate();
  (void)featex::FeatureManifest::from_preset(preset);
  experiment.fusion.validate();
  experiment.train.validate();
  bool known = false;
  for (auto m : select::kMethodNames) known = known || m == experiment.selection.method;
  if (!known) throw SpecError("unknown selection method: " + experiment.selection.method);
  if (experiment.parallelism < 1) throw SpecError("parallelism must be at least 1");
  if (!(explain_lambda_ratio > 0.0 && explain_lambda_ratio < 1.0)) {
    throw SpecError("explain.lambda_ratio must lie in (0, 1)");
  }
  if (out.empty()) throw SpecError("output directory is empty");
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"data", {{"corpus", corpus}, {"synth", synth}}},
          {"window", {{"window_s", window.window_s}, {"step_s", window.step_s}}},
          {"features", {{"preset", preset}, {"no_eda_components", no_eda_components}}},
          {"selection", experiment.selection},
          {"fusion", experiment.fusion},
          {"train", experiment.train},
          {"explain", {{"lambda_ratio", explain_lambda_ratio}, {"subject", explain_subject}}},
          {"seed", experiment.seed},
          {"parallelism", experiment.parallelism},
          {"out", out.string()}};
}

namespace {

ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw SchemaError("config must be a JSON object");
  if (j.contains("data")) {
    const auto& d = j.at("data");
    c.corpus = d.value("corpus", c.corpus);
    if (d.contains("synth")) c.synth = d.at("synth").get<sigcore::SynthSpec>();
  }
  if (j.contains("window")) {
    c.window.window_s = j.at("window").value("window_s", c.window.window_s);
    c.window.step_s = j.at("window").value("step_s", c.window.step_s);
  }
  if (j.contains("features")) {
    c.preset = j.at("features").value("preset", c.preset);
    c.no_eda_components = j.at("features").value("no_eda_components", c.no_eda_components);
  }
  if (j.contains("selection")) c.experiment.selection = j.at("selection").get<eval::SelectionConfig>();
  if (j.contains("fusion")) c.experiment.fusion = j.at("fusion").get<fusion::FusionSpec>();
  if (j.contains("train")) c.experiment.train = j.at("train").get<nn::TrainConfig>();
  if (j.contains("explain")) {
    c.explain_lambda_ratio = j.at("explain").value("lambda_ratio", c.explain_lambda_ratio);
    c.explain_subject = j.at("explain").value("subject", c.explain_subject);
  }
  c.experiment.seed = j.value("seed", c.experiment.seed);
  c.experiment.parallelism = j.value("parallelism", c.experiment.parallelism);
  c.out = j.value("out", c.out.string());
  return c;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  try {
    return parse_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("config " + path.string() + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string ExperimentConfig::digest() const {
  nlohmann::json j = to_json();
  j.erase("out");  // where results go does not change them
  j.erase("parallelism");
  return digest_hex(j.dump());
}

std::string ExperimentConfig::feature_digest() const {
  const nlohmann::json j = to_json();
  const nlohmann::json part{{"data", j["data"]}, {"window", j["window"]}, {"features", j["features"]}};
  return digest_hex(part.dump());
}

}  // namespace stressfuse::cli

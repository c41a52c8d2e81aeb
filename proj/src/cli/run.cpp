#include <cstdio>
#include <optional>

#include <CLI11.hpp>

#include "stressfuse/cli/commands.hpp"
#include "stressfuse/common/error.hpp"
#include "stressfuse/common/log.hpp"

namespace stressfuse::cli {

// Precedence: built-in defaults < --config file < command-line flags.
int run_cli(int argc, const char* const* argv) {
  CLI::App app{"stressfuse: multimodal stress detection pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out, preset, method, family, kind, modality, profile;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallel, epochs, subjects;
  bool no_eda = false, verbose = false, quiet = false;
  app.add_option("--config", config_path, "experiment config JSON")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "experiment seed");
  app.add_option("--parallel", parallel, "folds evaluated concurrently")->check(CLI::PositiveNumber);
  app.add_flag("--no-eda-components", no_eda, "drop tonic, phasic and SCR columns");
  app.add_option("--preset", preset, "feature manifest preset");
  app.add_option("--method", method, "selection method");
  app.add_option("--family", family, "fusion family");
  app.add_option("--kind", kind, "model kind");
  app.add_option("--modality", modality, "multivariate modality (bio|lnd)");
  app.add_option("--epochs", epochs, "training epochs")->check(CLI::PositiveNumber);
  app.add_option("--subjects", subjects, "synthetic subject count");
  app.add_option("--profile", profile, "synthetic class profile (standard|scr_only)");
  app.add_flag("-v,--verbose", verbose, "log progress");
  app.add_flag("-q,--quiet", quiet, "suppress warnings");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  auto* features = app.add_subcommand("features", "build the windowed feature matrix");
  auto* sel = app.add_subcommand("select", "rank and select features");
  bool sel_all = false;
  sel->add_flag("--all-selectors", sel_all, "run all six selection methods");
  auto* train = app.add_subcommand("train", "train the configured model on all rows");
  auto* ev = app.add_subcommand("eval", "leave-one-subject-out evaluation");
  bool all_models = false, eval_all_sel = false;
  ev->add_flag("--all-models", all_models, "evaluate all eleven model/data combinations");
  ev->add_flag("--all-selectors", eval_all_sel, "evaluate with all six selection methods");
  auto* expl = app.add_subcommand("explain", "lasso attributions for one held-out subject");
  std::string subject;
  expl->add_option("--subject", subject, "held-out subject to explain");
  auto* report = app.add_subcommand("report", "summarize evaluation reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    set_log_level(quiet ? LogLevel::kQuiet : verbose ? LogLevel::kInfo : LogLevel::kWarn);
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    if (!out.empty()) cfg.out = out;
    if (seed) cfg.experiment.seed = *seed;
    if (parallel) cfg.experiment.parallelism = *parallel;
    if (no_eda) cfg.no_eda_components = true;
    if (!preset.empty()) cfg.preset = preset;
    if (!method.empty()) cfg.experiment.selection.method = method;
    if (!family.empty()) cfg.experiment.fusion.family = fusion::family_from(family);
    if (!kind.empty()) cfg.experiment.fusion.kind = fusion::kind_from(kind);
    if (!modality.empty()) {
      if (modality != "bio" && modality != "lnd") throw SpecError("modality must be bio or lnd");
      cfg.experiment.fusion.modality = modality == "bio" ? featex::Modality::kBio : featex::Modality::kLandmark;
    }
    if (epochs) cfg.experiment.train.epochs = *epochs;
    if (subjects) cfg.synth.n_subjects = *subjects;
    if (!profile.empty()) cfg.synth.profile = sigcore::ClassProfile::named(profile);
    if (!subject.empty()) cfg.explain_subject = subject;
    cfg.validate();

    if (synth->parsed()) return cmd_synth(cfg);
    if (features->parsed()) return cmd_features(cfg);
    if (sel->parsed()) return cmd_select(cfg, sel_all);
    if (train->parsed()) return cmd_train(cfg);
    if (ev->parsed()) return cmd_eval(cfg, all_models, eval_all_sel);
    if (expl->parsed()) return cmd_explain(cfg);
    if (report->parsed()) return cmd_report(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

}  // namespace stressfuse::cli

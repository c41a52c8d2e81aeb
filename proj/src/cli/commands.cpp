#include "stressfuse/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "stressfuse/common/error.hpp"
#include "stressfuse/common/log.hpp"
#include "stressfuse/common/svg.hpp"
#include "stressfuse/explain/explain.hpp"
#include "stressfuse/featex/manifest.hpp"
#include "stressfuse/featex/matrix.hpp"
#include "stressfuse/nn/train.hpp"
#include "stressfuse/select/select.hpp"
#include "stressfuse/sigcore/corpus.hpp"

namespace stressfuse::cli {
namespace fs = std::filesystem;

namespace {

constexpr const char* kFeaturesCsv = "features.csv";
constexpr const char* kFeaturesRawCsv = "features_raw.csv";
constexpr const char* kFeaturesJson = "features.json";

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DependencyError("missing upstream artifact: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void require(const fs::path& path, const char* producer) {
  if (!fs::exists(path)) {
    throw DependencyError("missing upstream artifact " + path.string() + " (run `" + producer + "` first)");
  }
}

// CSV and SVG files cannot carry the config digest inline in every reader's
// format, so each output directory keeps a provenance.json mapping file name
// to the digest and command that produced it.
void record_provenance(const fs::path& out, const std::vector<fs::path>& files, const std::string& digest,
                       const std::string& command) {
  const fs::path p = out / "provenance.json";
  nlohmann::json j = fs::exists(p) ? read_json(p) : nlohmann::json::object();
  for (const auto& f : files) {
    j[fs::relative(f, out).generic_string()] = {{"config_digest", digest}, {"command", command}};
  }
  write_json(p, j);
}

void write_svg(const fs::path& path, std::string svg, const std::string& digest) {
  const auto pos = svg.find('\n');
  svg.insert(pos + 1, "<!-- config_digest " + digest + " -->\n");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << svg;
}

fs::path corpus_dir(const ExperimentConfig& cfg) { return cfg.corpus.empty() ? cfg.out / "corpus" : fs::path(cfg.corpus); }

struct LoadedFeatures {
  featex::FeatureMatrix matrix;
  Matrix raw;
};

LoadedFeatures load_features(const ExperimentConfig& cfg) {
  const fs::path meta = cfg.out / kFeaturesJson;
  require(meta, "features");
  const nlohmann::json j = read_json(meta);
  if (j.value("feature_digest", std::string()) != cfg.feature_digest()) {
    throw DependencyError("stale upstream artifact " + meta.string() +
                          ": it was built from a different data/window/feature config (rerun `features`)");
  }
  require(cfg.out / kFeaturesCsv, "features");
  require(cfg.out / kFeaturesRawCsv, "features");
  LoadedFeatures f;
  f.matrix = featex::read_feature_csv(cfg.out / kFeaturesCsv);
  f.raw = featex::read_feature_csv(cfg.out / kFeaturesRawCsv).values;
  if (f.raw.rows != f.matrix.rows() || f.raw.cols != f.matrix.cols()) {
    throw DependencyError("feature files in " + cfg.out.string() + " disagree in shape (rerun `features`)");
  }
  return f;
}

std::vector<std::string> methods_for(const ExperimentConfig& cfg, bool all) {
  if (!all) return {cfg.experiment.selection.method};
  return {std::begin(select::kMethodNames), std::end(select::kMethodNames)};
}

std::vector<std::size_t> all_columns(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

select::Selection select_block(const LoadedFeatures& f, const std::vector<std::size_t>& cols, const std::string& method,
                               std::size_t k, const ExperimentConfig& cfg, const std::string& role) {
  if (cols.empty()) throw DataError("feature matrix has no " + role + " columns");
  select::SelectOptions opts;
  opts.forest = cfg.experiment.selection.forest;
  opts.forest.seed = eval::fold_seed(cfg.experiment.seed, "all", "forest_" + role);
  const Matrix raw = f.raw.select_cols(cols);
  opts.raw_values = &raw;
  return select::select(f.matrix.select_cols(cols), method, k, opts);
}

std::vector<std::size_t> indices_of(const featex::FeatureMatrix& m, const std::vector<std::string>& names) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < m.feature_names.size(); ++i) pos[m.feature_names[i]] = i;
  std::vector<std::size_t> out;
  for (const auto& n : names) {
    auto it = pos.find(n);
    if (it == pos.end()) throw DependencyError("selected feature " + n + " is not in the feature matrix");
    out.push_back(it->second);
  }
  return out;
}

std::string report_stem(const eval::EvalReport& r, const std::string& method) { return r.label + "__" + method; }

}  // namespace

int cmd_synth(const ExperimentConfig& cfg) {
  cfg.synth.validate();
  const fs::path root = cfg.out / "corpus";
  fs::create_directories(root);
  const auto sessions = sigcore::synth_raw(cfg.synth);
  sigcore::write_corpus(root, sessions, cfg.synth);
  std::printf("synth: %zu sessions of %d s written to %s\n", sessions.size(), cfg.synth.session_seconds,
              root.string().c_str());
  return 0;
}

int cmd_features(const ExperimentConfig& cfg) {
  const fs::path root = corpus_dir(cfg);
  if (cfg.corpus.empty()) require(root / "manifest.json", "synth");
  const auto sessions = sigcore::load_corpus(root);
  if (sessions.empty()) throw DataError("corpus " + root.string() + " holds no sessions");

  featex::FeatureManifest manifest = featex::FeatureManifest::from_preset(cfg.preset);
  if (cfg.no_eda_components) manifest = manifest.without_eda_components();
  featex::BuildOptions opts;
  opts.window = cfg.window;
  opts.normalize = false;
  featex::FeatureMatrix raw = featex::build_matrix(sessions, manifest, opts);
  featex::FeatureMatrix norm = raw;
  featex::zscore_per_subject(norm);

  fs::create_directories(cfg.out);
  featex::write_feature_csv(cfg.out / kFeaturesCsv, norm);
  featex::write_feature_csv(cfg.out / kFeaturesRawCsv, raw);
  write_json(cfg.out / kFeaturesJson, {{"config_digest", cfg.digest()},
                                       {"feature_digest", cfg.feature_digest()},
                                       {"preset", cfg.preset},
                                       {"no_eda_components", cfg.no_eda_components},
                                       {"rows", norm.rows()},
                                       {"columns", norm.cols()},
                                       {"dropped_windows", raw.dropped_windows},
                                       {"subjects", norm.subjects()},
                                       {"manifest", manifest.to_json()}});
  record_provenance(cfg.out, {cfg.out / kFeaturesCsv, cfg.out / kFeaturesRawCsv}, cfg.digest(), "features");
  std::printf("features: %zu rows, %zu columns, %zu dropped windows\n", norm.rows(), norm.cols(),
              raw.dropped_windows);
  return 0;
}

int cmd_select(const ExperimentConfig& cfg, bool all_selectors) {
  const LoadedFeatures f = load_features(cfg);
  const auto& sc = cfg.experiment.selection;
  const fs::path dir = cfg.out / "selection";
  fs::create_directories(dir);
  for (const auto& method : methods_for(cfg, all_selectors)) {
    nlohmann::json j{{"config_digest", cfg.digest()}, {"method", method}};
    const auto bio = f.matrix.columns_of(featex::Modality::kBio);
    const auto lnd = f.matrix.columns_of(featex::Modality::kLandmark);
    if (!bio.empty()) j["bio"] = select_block(f, bio, method, sc.k_bio, cfg, "bio").report.to_json(50);
    if (!lnd.empty()) j["lnd"] = select_block(f, lnd, method, sc.k_lnd, cfg, "lnd").report.to_json(50);
    j["fused"] = select_block(f, all_columns(f.matrix.cols()), method, sc.k_fused, cfg, "fused").report.to_json(50);
    write_json(dir / (method + ".json"), j);
    const auto& top = j["fused"]["selected"];
    std::printf("select: %s top fused feature %s\n", method.c_str(),
                top.empty() ? "(none)" : top[0].get<std::string>().c_str());
  }
  return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
  const LoadedFeatures f = load_features(cfg);
  const auto& spec = cfg.experiment;
  const fs::path sel_path = cfg.out / "selection" / (spec.selection.method + ".json");
  require(sel_path, "select");
  const nlohmann::json sel = read_json(sel_path);

  const fs::path dir = cfg.out / "models";
  fs::create_directories(dir);
  const auto& fu = spec.fusion;
  const std::string label = fu.label();
  std::vector<fs::path> written;
  nlohmann::json meta{{"config_digest", cfg.digest()}, {"model", label}, {"selection", sel_path.filename().string()}};

  struct Input {
    std::vector<std::size_t> cols;
    Matrix x;
  };
  auto prepare = [&](const char* block, const char* role) {
    if (!sel.contains(block)) throw DependencyError(sel_path.string() + " has no " + block + " selection");
    Input in;
    in.cols = indices_of(f.matrix, sel[block]["selected"].get<std::vector<std::string>>());
    select::Standardizer st;
    in.x = st.fit_transform(f.matrix.values.select_cols(in.cols), f.matrix.subject_ids);
    meta[role] = {{"features", sel[block]["selected"]}, {"mean", st.mean()}, {"scale", st.scale()}};
    return in;
  };
  auto fit = [&](const nn::ModelSpec& model, const Matrix& x, const std::string& name) {
    nn::TrainConfig tc = spec.train;
    tc.seed = eval::fold_seed(spec.seed, "all", name);
    const nn::TrainResult tr = nn::train(model, x, f.matrix.labels, tc);
    const fs::path mp = dir / (label + (name == "train" ? "" : "_" + name.substr(6)) + ".model");
    const fs::path lp = fs::path(mp).replace_extension(".loss.csv");
    nn::save_model(mp, tr.model, tc.seed);
    nn::write_loss_curve(lp, tr.loss_curve);
    written.push_back(mp);
    written.push_back(lp);
    std::printf("train: %s, %zu params, final loss %.6f%s\n", mp.filename().string().c_str(), tr.model.param_count(),
                tr.loss_curve.empty() ? 0.0 : tr.loss_curve.back(), tr.early_stopped ? " (early stop)" : "");
  };

  switch (fu.family) {
    case fusion::Family::kMultivariate: {
      const bool bio = fu.modality == featex::Modality::kBio;
      Input in = prepare(bio ? "bio" : "lnd", "input");
      fit(fusion::build_multivariate(fu.kind, fu.modality, in.cols.size(), fu.arch), in.x, "train");
      break;
    }
    case fusion::Family::kEarly: {
      Input in = prepare("fused", "input");
      fit(fusion::build_early(fu.kind, in.cols.size(), fu.arch), in.x, "train");
      break;
    }
    case fusion::Family::kLateDecision: {
      Input b = prepare("bio", "input_bio");
      Input l = prepare("lnd", "input_lnd");
      fit(fusion::build_multivariate(fu.bio_kind, featex::Modality::kBio, b.cols.size(), fu.arch), b.x, "train_bio");
      fit(fusion::build_multivariate(fu.lnd_kind, featex::Modality::kLandmark, l.cols.size(), fu.arch), l.x,
          "train_lnd");
      break;
    }
    case fusion::Family::kLateConcat: {
      Input b = prepare("bio", "input_bio");
      Input l = prepare("lnd", "input_lnd");
      Matrix x(b.x.rows, b.x.cols + l.x.cols);
      for (std::size_t r = 0; r < x.rows; ++r) {
        std::copy(b.x.row(r).begin(), b.x.row(r).end(), x.row(r).begin());
        std::copy(l.x.row(r).begin(), l.x.row(r).end(), x.row(r).begin() + static_cast<long>(b.x.cols));
      }
      fit(fusion::build_late_concat(fusion::build_trunk(fu.bio_kind, b.cols.size(), fu.arch),
                                    fusion::build_trunk(fu.lnd_kind, l.cols.size(), fu.arch), fu.arch),
          x, "train");
      break;
    }
  }
  write_json(dir / (label + ".json"), meta);
  record_provenance(cfg.out, written, cfg.digest(), "train");
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg, bool all_models, bool all_selectors) {
  const LoadedFeatures f = load_features(cfg);
  const fs::path dir = cfg.out / "eval";
  fs::create_directories(dir);
  const std::vector<fusion::FusionSpec> models =
      all_models ? fusion::paper_combinations() : std::vector<fusion::FusionSpec>{cfg.experiment.fusion};

  std::vector<eval::EvalReport> reports;
  std::vector<fs::path> written;
  bool failed = false;
  for (const auto& method : methods_for(cfg, all_selectors)) {
    for (const auto& model : models) {
      ExperimentConfig run = cfg;
      run.experiment.fusion = model;
      run.experiment.fusion.arch = cfg.experiment.fusion.arch;
      run.experiment.selection.method = method;
      const std::string digest = run.digest();
      eval::EvalReport r = eval::run_experiment(f.matrix, &f.raw, run.experiment, digest);
      const std::string stem = report_stem(r, method);
      eval::write_report_json(dir / (stem + ".json"), r);
      write_json(dir / (stem + ".metrics.json"), r.metrics_json());
      eval::write_folds_csv(dir / (stem + ".folds.csv"), r);
      eval::write_fp_fn_svg(dir / (stem + ".fpfn.svg"), r);
      {
        std::ifstream in(dir / (stem + ".fpfn.svg"));
        std::string svg((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        write_svg(dir / (stem + ".fpfn.svg"), svg, digest);
      }
      written.push_back(dir / (stem + ".folds.csv"));
      written.push_back(dir / (stem + ".fpfn.svg"));
      std::printf("eval: %-26s %-9s acc %.4f  macro-F1 %.4f  (fold mean acc %.4f)%s\n", r.label.c_str(),
                  method.c_str(), r.pooled_metrics.accuracy, r.pooled_metrics.macro_f1, r.fold_mean.accuracy,
                  r.any_failed() ? "  FAILED FOLDS" : "");
      failed = failed || r.any_failed();
      reports.push_back(std::move(r));
    }
  }
  eval::write_cost_csv(dir / "cost.csv", reports);
  written.push_back(dir / "cost.csv");
  record_provenance(cfg.out, written, cfg.digest(), "eval");
  return failed ? 1 : 0;
}

int cmd_explain(const ExperimentConfig& cfg) {
  const LoadedFeatures f = load_features(cfg);
  const auto subjects = f.matrix.subjects();
  const std::string subject = cfg.explain_subject.empty() ? subjects.front() : cfg.explain_subject;
  const auto folds = eval::loso_folds(f.matrix.subject_ids);
  const auto fold = std::find_if(folds.begin(), folds.end(), [&](const eval::Fold& x) { return x.subject == subject; });
  if (fold == folds.end()) throw DataError("subject " + subject + " is not in the feature matrix");

  const featex::FeatureMatrix train = f.matrix.select_rows(fold->train_rows);
  const featex::FeatureMatrix test = f.matrix.select_rows(fold->test_rows);
  select::Standardizer st;
  const Matrix xtr = st.fit_transform(train.values, train.subject_ids);
  if (st.fit_subjects().count(subject)) throw LeakageError("explained subject reached the standardizer fit");
  const Matrix xte = st.transform(test.values);
  const std::vector<double> y(train.labels.begin(), train.labels.end());
  const double lambda = cfg.explain_lambda_ratio * select::lasso_lambda_max(xtr, y);
  const select::LassoFit fit = select::lasso_fit(xtr, y, lambda);

  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < fit.beta.size(); ++j)
    if (fit.beta[j] != 0.0) active.push_back(j);
  std::vector<double> beta;
  std::vector<std::string> names;
  for (std::size_t j : active) {
    beta.push_back(fit.beta[j]);
    names.push_back(train.feature_names[j]);
  }
  const Matrix bg = active.empty() ? Matrix(xtr.rows, 0) : xtr.select_cols(active);
  const Matrix rows = active.empty() ? Matrix(xte.rows, 0) : xte.select_cols(active);
  const explain::LinearExplainer explainer(beta, fit.intercept, bg, names);
  const auto expl = explainer.explain_rows(rows);
  const auto summary = explain::summary_ranking(expl);

  const fs::path dir = cfg.out / "explain";
  fs::create_directories(dir);
  nlohmann::json rows_j = nlohmann::json::array();
  for (std::size_t i = 0; i < expl.size(); ++i) {
    nlohmann::json e = expl[i].to_json();
    e["label"] = test.labels[i];
    rows_j.push_back(std::move(e));
  }
  write_json(dir / (subject + ".json"),
             {{"config_digest", cfg.digest()},
              {"subject", subject},
              {"lambda", lambda},
              {"intercept", fit.intercept},
              {"active_features", names.size()},
              {"note", "features with zero coefficient have zero attribution and are omitted"},
              {"rows", rows_j}});
  const fs::path csv = dir / (subject + ".summary.csv");
  explain::write_summary_csv(csv, summary);
  std::vector<fs::path> written{csv};
  if (!expl.empty()) {
    const fs::path svg = dir / (subject + ".force.svg");
    explain::write_force_svg(svg, expl.front());
    std::ifstream in(svg);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    write_svg(svg, text, cfg.digest());
    written.push_back(svg);
  }
  record_provenance(cfg.out, written, cfg.digest(), "explain");
  std::printf("explain: %s, %zu active features, top %s\n", subject.c_str(), names.size(),
              summary.empty() ? "(none)" : summary.front().name.c_str());
  return 0;
}

int cmd_report(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.out / "eval";
  require(dir, "eval");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.path().extension() == ".json" && name.find(".metrics.json") == std::string::npos) files.push_back(e.path());
  }
  if (files.empty()) throw DependencyError("no evaluation reports in " + dir.string() + " (run `eval` first)");
  std::sort(files.begin(), files.end());

  std::string csv = "model,method,accuracy,precision,recall,f1,fold_mean_accuracy,params,train_s,test_s,failed\n";
  std::string md = "| model | method | accuracy | precision | recall | F1 | fold-mean acc | params | train s | test s |\n"
                   "|---|---|---|---|---|---|---|---|---|---|\n";
  char buf[512];
  for (const auto& p : files) {
    const nlohmann::json j = read_json(p);
    const auto& m = j.at("pooled");
    const auto& c = j.at("cost");
    const std::string method = j.at("config").at("selection").at("method");
    const bool failed = !j.at("failed_folds").empty();
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%zu,%.3f,%.3f,%d\n",
                  j.at("model").get<std::string>().c_str(), method.c_str(), m.at("accuracy").get<double>(),
                  m.at("macro_precision").get<double>(), m.at("macro_recall").get<double>(),
                  m.at("macro_f1").get<double>(), j.at("fold_mean").at("accuracy").get<double>(),
                  c.at("param_count").get<std::size_t>(), c.at("train_s").get<double>(), c.at("test_s").get<double>(),
                  failed ? 1 : 0);
    csv += buf;
    std::snprintf(buf, sizeof buf, "| %s | %s | %.2f | %.2f | %.2f | %.2f | %.2f | %zu | %.2f | %.3f |%s\n",
                  j.at("model").get<std::string>().c_str(), method.c_str(), 100 * m.at("accuracy").get<double>(),
                  100 * m.at("macro_precision").get<double>(), 100 * m.at("macro_recall").get<double>(),
                  100 * m.at("macro_f1").get<double>(), 100 * j.at("fold_mean").at("accuracy").get<double>(),
                  c.at("param_count").get<std::size_t>(), c.at("train_s").get<double>(), c.at("test_s").get<double>(),
                  failed ? " failed folds" : "");
    md += buf;
  }
  {
    std::ofstream out(cfg.out / "report.csv", std::ios::binary);
    if (!out) throw IoError("cannot write report.csv");
    out << csv;
  }
  {
    std::ofstream out(cfg.out / "report.md", std::ios::binary);
    if (!out) throw IoError("cannot write report.md");
    out << "<!-- config_digest " << cfg.digest() << " -->\n" << md;
  }
  record_provenance(cfg.out, {cfg.out / "report.csv", cfg.out / "report.md"}, cfg.digest(), "report");
  std::printf("report: %zu evaluations summarized in %s\n", files.size(), (cfg.out / "report.md").string().c_str());
  return 0;
}

}  // namespace stressfuse::cli

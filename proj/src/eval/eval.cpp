#include "stressfuse/eval/eval.hpp"

#include <chrono>
#include <fstream>

#include <omp.h>

#include "stressfuse/common/digest.hpp"
#include "stressfuse/common/error.hpp"
#include "stressfuse/common/log.hpp"
#include "stressfuse/common/rng.hpp"
#include "stressfuse/common/svg.hpp"

namespace stressfuse::eval {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, a.cols + b.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    std::copy(a.row(r).begin(), a.row(r).end(), out.row(r).begin());
    std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + static_cast<long>(a.cols));
  }
  return out;
}

// Selected columns of one input block plus its standardized train/test values.
struct Block {
  std::vector<std::size_t> columns;  // indices into the full matrix
  Matrix train;
  Matrix test;
};

struct FoldContext {
  const featex::FeatureMatrix& train;
  const featex::FeatureMatrix& test;
  const Matrix* raw_train;
  const ExperimentSpec& spec;
  FoldResult& result;
};

Block make_block(FoldContext& ctx, const std::vector<std::size_t>& candidates, std::size_t k,
                 const std::string& role) {
  if (candidates.empty()) throw DataError("no candidate columns for " + role);
  const auto t0 = Clock::now();
  featex::FeatureMatrix sub = ctx.train.select_cols(candidates);
  select::SelectOptions opts;
  opts.forest = ctx.spec.selection.forest;
  opts.forest.seed = fold_seed(ctx.spec.seed, ctx.result.subject, "forest_" + role);
  Matrix raw_sub;
  if (ctx.raw_train) {
    raw_sub = ctx.raw_train->select_cols(candidates);
    opts.raw_values = &raw_sub;
  }
  const select::Selection sel = select::select(sub, ctx.spec.selection.method, k, opts);
  ctx.result.selection_subjects.insert(sub.subject_ids.begin(), sub.subject_ids.end());

  Block b;
  for (std::size_t j : sel.report.selected) b.columns.push_back(candidates[j]);
  select::Standardizer stdz;
  b.train = stdz.fit_transform(ctx.train.values.select_cols(b.columns), ctx.train.subject_ids);
  b.test = stdz.transform(ctx.test.values.select_cols(b.columns));
  ctx.result.normalizer_subjects.insert(stdz.fit_subjects().begin(), stdz.fit_subjects().end());
  for (std::size_t c : b.columns) ctx.result.selected.push_back(ctx.train.feature_names[c]);
  ctx.result.select_s += seconds_since(t0);
  return b;
}

nn::Network fit(FoldContext& ctx, const nn::ModelSpec& model, const Matrix& x, const std::string& role) {
  nn::TrainConfig cfg = ctx.spec.train;
  cfg.seed = fold_seed(ctx.spec.seed, ctx.result.subject, role);
  const auto t0 = Clock::now();
  nn::TrainResult tr = nn::train(model, x, ctx.train.labels, cfg);
  ctx.result.train_s += seconds_since(t0);
  ctx.result.param_count += tr.model.param_count();
  ctx.result.train_subjects.insert(ctx.train.subject_ids.begin(), ctx.train.subject_ids.end());
  return std::move(tr.model);
}

std::vector<int> run_fold_model(FoldContext& ctx) {
  const auto& f = ctx.spec.fusion;
  const auto& s = ctx.spec.selection;
  const auto bio_cols = ctx.train.columns_of(featex::Modality::kBio);
  const auto lnd_cols = ctx.train.columns_of(featex::Modality::kLandmark);

  switch (f.family) {
    case fusion::Family::kMultivariate: {
      const bool bio = f.modality == featex::Modality::kBio;
      Block b = make_block(ctx, bio ? bio_cols : lnd_cols, bio ? s.k_bio : s.k_lnd, bio ? "bio" : "lnd");
      nn::Network net = fit(ctx, fusion::build_multivariate(f.kind, f.modality, b.columns.size(), f.arch), b.train,
                            "train");
      const auto t0 = Clock::now();
      auto p = fusion::predict(net, b.test);
      ctx.result.test_s += seconds_since(t0);
      return p.labels;
    }
    case fusion::Family::kEarly: {
      std::vector<std::size_t> all(ctx.train.cols());
      for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
      Block b = make_block(ctx, all, s.k_fused, "fused");
      nn::Network net = fit(ctx, fusion::build_early(f.kind, b.columns.size(), f.arch), b.train, "train");
      const auto t0 = Clock::now();
      auto p = fusion::predict(net, b.test);
      ctx.result.test_s += seconds_since(t0);
      return p.labels;
    }
    case fusion::Family::kLateConcat: {
      Block bb = make_block(ctx, bio_cols, s.k_bio, "bio");
      Block bl = make_block(ctx, lnd_cols, s.k_lnd, "lnd");
      const auto model = fusion::build_late_concat(fusion::build_trunk(f.bio_kind, bb.columns.size(), f.arch),
                                                   fusion::build_trunk(f.lnd_kind, bl.columns.size(), f.arch),
                                                   f.arch);
      nn::Network net = fit(ctx, model, hcat(bb.train, bl.train), "train");
      const auto t0 = Clock::now();
      auto p = fusion::predict(net, hcat(bb.test, bl.test));
      ctx.result.test_s += seconds_since(t0);
      return p.labels;
    }
    case fusion::Family::kLateDecision: {
      Block bb = make_block(ctx, bio_cols, s.k_bio, "bio");
      Block bl = make_block(ctx, lnd_cols, s.k_lnd, "lnd");
      nn::Network nb = fit(ctx,
                           fusion::build_multivariate(f.bio_kind, featex::Modality::kBio, bb.columns.size(), f.arch),
                           bb.train, "train_bio");
      nn::Network nl = fit(
          ctx, fusion::build_multivariate(f.lnd_kind, featex::Modality::kLandmark, bl.columns.size(), f.arch),
          bl.train, "train_lnd");
      const auto t0 = Clock::now();
      auto p = fusion::predict_late_decision(nb, nl, bb.test, bl.test);
      ctx.result.test_s += seconds_since(t0);
      return p.labels;
    }
  }
  throw InternalError("unknown fusion family");
}

FoldResult run_fold(const featex::FeatureMatrix& data, const Matrix* raw, const ExperimentSpec& spec,
                    const Fold& fold) {
  FoldResult r;
  r.subject = fold.subject;
  r.n_train = fold.train_rows.size();
  r.n_test = fold.test_rows.size();
  try {
    const featex::FeatureMatrix train = data.select_rows(fold.train_rows);
    const featex::FeatureMatrix test = data.select_rows(fold.test_rows);
    r.test_subjects.insert(test.subject_ids.begin(), test.subject_ids.end());
    Matrix raw_train;
    if (raw) raw_train = raw->select_rows(fold.train_rows);
    FoldContext ctx{train, test, raw ? &raw_train : nullptr, spec, r};
    const std::vector<int> pred = run_fold_model(ctx);
    check_leakage(r);
    r.cm = confusion(test.labels, pred);
    r.metrics = metrics(r.cm);
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
    r.cm = {};
    r.metrics = {};
    log_warn("fold " + fold.subject + " failed: " + r.error);
  }
  return r;
}

nlohmann::json cm_json(const ConfusionMatrix& cm) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : cm.counts) j.push_back(row);
  return j;
}

nlohmann::json rates_json(const std::array<ClassRates, kClasses>& rates) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rates) j.push_back({{"fp_rate", r.fp_rate}, {"fn_rate", r.fn_rate}});
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

}  // namespace

void to_json(nlohmann::json& j, const SelectionConfig& s) {
  j = {{"method", s.method},
       {"k_bio", s.k_bio},
       {"k_lnd", s.k_lnd},
       {"k_fused", s.k_fused},
       {"forest",
        {{"n_trees", s.forest.n_trees},
         {"max_depth", s.forest.max_depth},
         {"min_leaf", s.forest.min_leaf},
         {"features_per_split", s.forest.features_per_split}}}};
}

void from_json(const nlohmann::json& j, SelectionConfig& s) {
  s.method = j.value("method", s.method);
  s.k_bio = j.value("k_bio", s.k_bio);
  s.k_lnd = j.value("k_lnd", s.k_lnd);
  s.k_fused = j.value("k_fused", s.k_fused);
  if (j.contains("forest")) {
    const auto& f = j.at("forest");
    s.forest.n_trees = f.value("n_trees", s.forest.n_trees);
    s.forest.max_depth = f.value("max_depth", s.forest.max_depth);
    s.forest.min_leaf = f.value("min_leaf", s.forest.min_leaf);
    s.forest.features_per_split = f.value("features_per_split", s.forest.features_per_split);
  }
}

void to_json(nlohmann::json& j, const ExperimentSpec& e) {
  j = {{"fusion", e.fusion}, {"selection", e.selection}, {"train", e.train}, {"seed", e.seed}};
}

void from_json(const nlohmann::json& j, ExperimentSpec& e) {
  if (j.contains("fusion")) e.fusion = j.at("fusion").get<fusion::FusionSpec>();
  if (j.contains("selection")) e.selection = j.at("selection").get<SelectionConfig>();
  if (j.contains("train")) e.train = j.at("train").get<nn::TrainConfig>();
  e.seed = j.value("seed", e.seed);
  e.parallelism = j.value("parallelism", e.parallelism);
}

std::uint64_t fold_seed(std::uint64_t seed, const std::string& subject, const std::string& role) {
  return Rng(seed).split(subject).split(role).next_u64();
}

void check_leakage(const FoldResult& f) {
  const auto leaked = [&](const std::set<std::string>& s, const char* stage) {
    if (s.count(f.subject)) throw LeakageError("held-out subject " + f.subject + " reached " + stage);
  };
  leaked(f.selection_subjects, "feature selection");
  leaked(f.normalizer_subjects, "normalization");
  leaked(f.train_subjects, "training");
  if (f.test_subjects.size() > 1 || (f.test_subjects.size() == 1 && !f.test_subjects.count(f.subject))) {
    throw LeakageError("test rows of fold " + f.subject + " include other subjects");
  }
}

bool EvalReport::any_failed() const {
  for (const auto& f : folds)
    if (f.failed) return true;
  return false;
}

EvalReport run_experiment(const featex::FeatureMatrix& data, const Matrix* raw_values, const ExperimentSpec& spec,
                          const std::string& digest) {
  data.validate();
  spec.fusion.validate();
  spec.train.validate();
  if (raw_values && (raw_values->rows != data.rows() || raw_values->cols != data.cols())) {
    throw ShapeError("raw value matrix does not match the feature matrix");
  }
  if (spec.parallelism < 1) throw SpecError("parallelism must be at least 1");
  const std::vector<Fold> folds = loso_folds(data.subject_ids);

  EvalReport r;
  r.spec = spec;
  r.label = spec.fusion.label();
  r.digest = digest.empty() ? digest_hex(nlohmann::json(spec).dump()) : digest;
  r.folds.resize(folds.size());

  const auto n = static_cast<long>(folds.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(spec.parallelism)
  for (long i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    r.folds[u] = run_fold(data, raw_values, spec, folds[u]);
  }

  r.cost.label = r.label;
  std::size_t ok = 0;
  for (const auto& f : r.folds) {
    r.pooled += f.cm;
    r.cost.select_s += f.select_s;
    r.cost.train_s += f.train_s;
    r.cost.test_s += f.test_s;
    r.cost.param_count = std::max(r.cost.param_count, f.param_count);
    if (f.failed) continue;
    ++ok;
    const Metrics& m = f.metrics;
    r.fold_mean.accuracy += m.accuracy;
    r.fold_mean.macro_precision += m.macro_precision;
    r.fold_mean.macro_recall += m.macro_recall;
    r.fold_mean.macro_f1 += m.macro_f1;
    for (std::size_t c = 0; c < kClasses; ++c) {
      r.fold_mean.precision[c] += m.precision[c];
      r.fold_mean.recall[c] += m.recall[c];
      r.fold_mean.f1[c] += m.f1[c];
    }
  }
  if (ok > 0) {
    const double d = static_cast<double>(ok);
    r.fold_mean.accuracy /= d;
    r.fold_mean.macro_precision /= d;
    r.fold_mean.macro_recall /= d;
    r.fold_mean.macro_f1 /= d;
    for (std::size_t c = 0; c < kClasses; ++c) {
      r.fold_mean.precision[c] /= d;
      r.fold_mean.recall[c] /= d;
      r.fold_mean.f1[c] /= d;
    }
  }
  if (r.pooled.total() > 0) {
    r.pooled_metrics = metrics(r.pooled);
    r.rates = fp_fn_rates(r.pooled);
  }
  return r;
}

nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"macro_precision", m.macro_precision},
          {"macro_recall", m.macro_recall},
          {"macro_f1", m.macro_f1}};
}

nlohmann::json EvalReport::metrics_json() const {
  nlohmann::json folds_j = nlohmann::json::array();
  for (const auto& f : folds) {
    nlohmann::json fj{{"subject", f.subject},
                      {"n_train", f.n_train},
                      {"n_test", f.n_test},
                      {"param_count", f.param_count},
                      {"failed", f.failed},
                      {"confusion", cm_json(f.cm)},
                      {"metrics", metrics_to_json(f.metrics)},
                      {"selected", f.selected}};
    if (f.failed) fj["error"] = f.error;
    folds_j.push_back(std::move(fj));
  }
  std::vector<std::string> failures;
  for (const auto& f : folds)
    if (f.failed) failures.push_back(f.subject);
  return {{"schema_version", kReportSchemaVersion},
          {"config_digest", digest},
          {"model", label},
          {"folds", folds_j},
          {"pooled_confusion", cm_json(pooled)},
          {"pooled", metrics_to_json(pooled_metrics)},
          {"fold_mean", metrics_to_json(fold_mean)},
          {"fp_fn", rates_json(rates)},
          {"failed_folds", failures}};
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j = metrics_json();
  j["config"] = spec;
  j["cost"] = {{"model", cost.label},
               {"param_count", cost.param_count},
               {"select_s", cost.select_s},
               {"train_s", cost.train_s},
               {"test_s", cost.test_s}};
  for (std::size_t i = 0; i < folds.size(); ++i) {
    j["folds"][i]["select_s"] = folds[i].select_s;
    j["folds"][i]["train_s"] = folds[i].train_s;
    j["folds"][i]["test_s"] = folds[i].test_s;
  }
  return j;
}

void write_report_json(const std::filesystem::path& path, const EvalReport& r) {
  write_text(path, r.to_json().dump(2) + "\n");
}

void write_folds_csv(const std::filesystem::path& path, const EvalReport& r) {
  std::string s = "subject,n_test,accuracy,macro_precision,macro_recall,macro_f1,failed\n";
  char buf[256];
  for (const auto& f : r.folds) {
    std::snprintf(buf, sizeof buf, ",%zu,%.17g,%.17g,%.17g,%.17g,%d\n", f.n_test, f.metrics.accuracy,
                  f.metrics.macro_precision, f.metrics.macro_recall, f.metrics.macro_f1, f.failed ? 1 : 0);
    s += f.subject + buf;
  }
  write_text(path, s);
}

void write_cost_csv(const std::filesystem::path& path, std::span<const EvalReport> reports) {
  std::string s = "model,params,select_s,train_s,test_s\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f,%.6f\n", r.cost.param_count, r.cost.select_s, r.cost.train_s,
                  r.cost.test_s);
    s += r.cost.label + buf;
  }
  write_text(path, s);
}

void write_fp_fn_svg(const std::filesystem::path& path, const EvalReport& r) {
  svg::BarSeries fp{"FP rate", {}, "#ff7f0e"};
  svg::BarSeries fn{"FN rate", {}, "#1f77b4"};
  for (const auto& c : r.rates) {
    fp.values.push_back(c.fp_rate);
    fn.values.push_back(c.fn_rate);
  }
  write_text(path, svg::grouped_bars(r.label + " per-class FP/FN rate", {"low", "medium", "high"}, {fp, fn}, 1.0));
}

}  // namespace stressfuse::eval

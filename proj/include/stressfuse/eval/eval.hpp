#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stressfuse/common/matrix.hpp"
#include "stressfuse/featex/matrix.hpp"
#include "stressfuse/fusion/fusion.hpp"
#include "stressfuse/nn/train.hpp"
#include "stressfuse/select/select.hpp"

namespace stressfuse::eval {

inline constexpr std::size_t kClasses = 3;
inline constexpr int kReportSchemaVersion = 1;

// Rows are true labels, columns predictions.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kClasses>, kClasses> counts{};

  void add(int truth, int pred);
  std::uint64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred);

struct Metrics {
  double accuracy = 0.0;
  std::array<double, kClasses> precision{};
  std::array<double, kClasses> recall{};
  std::array<double, kClasses> f1{};
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// One-vs-rest per class, unweighted class means for the macro values, and
// 0/0 taken as 0. An empty matrix raises MetricError.
Metrics metrics(const ConfusionMatrix& cm);

struct ClassRates {
  double fp_rate = 0.0;  // FP / (FP + TN)
  double fn_rate = 0.0;  // FN / (TP + FN)
};
std::array<ClassRates, kClasses> fp_fn_rates(const ConfusionMatrix& cm);

struct Fold {
  std::string subject;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

// One fold per subject in sorted subject order. Fewer than two subjects
// raises FoldError.
std::vector<Fold> loso_folds(std::span<const std::string> subject_ids);

struct SelectionConfig {
  std::string method = "lasso";
  std::size_t k_bio = 30;
  std::size_t k_lnd = 100;
  std::size_t k_fused = 100;
  select::ForestConfig forest;
};

struct ExperimentSpec {
  fusion::FusionSpec fusion;
  SelectionConfig selection;
  nn::TrainConfig train;
  std::uint64_t seed = 1;
  int parallelism = 1;  // concurrent folds
};

void to_json(nlohmann::json& j, const SelectionConfig& s);
void from_json(const nlohmann::json& j, SelectionConfig& s);
void to_json(nlohmann::json& j, const ExperimentSpec& e);
void from_json(const nlohmann::json& j, ExperimentSpec& e);

// Seed for one role ("train", "forest", "train_bio", ...) within one fold.
std::uint64_t fold_seed(std::uint64_t seed, const std::string& subject, const std::string& role);

struct FoldResult {
  std::string subject;
  ConfusionMatrix cm;
  Metrics metrics;
  double select_s = 0.0;
  double train_s = 0.0;
  double test_s = 0.0;
  std::size_t param_count = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<std::string> selected;  // every selected column, bio first for late families
  bool failed = false;
  std::string error;

  // Subjects seen by each fitted stage; none may contain `subject`.
  std::set<std::string> selection_subjects;
  std::set<std::string> normalizer_subjects;
  std::set<std::string> train_subjects;
  std::set<std::string> test_subjects;
};

struct CostRow {
  std::string label;
  std::size_t param_count = 0;
  double select_s = 0.0;
  double train_s = 0.0;
  double test_s = 0.0;
};

struct EvalReport {
  std::string digest;
  std::string label;
  ExperimentSpec spec;
  std::vector<FoldResult> folds;
  ConfusionMatrix pooled;
  Metrics pooled_metrics;
  Metrics fold_mean;  // unweighted mean over folds that did not fail
  std::array<ClassRates, kClasses> rates{};
  CostRow cost;

  bool any_failed() const;
  // Everything except wall times; identical for identical configs.
  nlohmann::json metrics_json() const;
  nlohmann::json to_json() const;
};

// Throws LeakageError when the held-out subject reached a fitted stage or a
// test row comes from another subject.
void check_leakage(const FoldResult& fold);

// Per fold: selection fit on training rows, standardization fit on training
// rows, training, prediction on the held-out subject. raw_values, when given,
// holds the unnormalized matrix (same shape) for variance selection. Errors
// inside a fold mark it failed and the remaining folds still run.
EvalReport run_experiment(const featex::FeatureMatrix& data, const Matrix* raw_values, const ExperimentSpec& spec,
                          const std::string& digest = {});

void write_report_json(const std::filesystem::path& path, const EvalReport& r);
// subject,n_test,accuracy,macro_precision,macro_recall,macro_f1,failed
void write_folds_csv(const std::filesystem::path& path, const EvalReport& r);
// model,params,select_s,train_s,test_s
void write_cost_csv(const std::filesystem::path& path, std::span<const EvalReport> reports);
void write_fp_fn_svg(const std::filesystem::path& path, const EvalReport& r);

nlohmann::json metrics_to_json(const Metrics& m);

}  // namespace stressfuse::eval

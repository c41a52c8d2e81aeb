#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stressfuse/common/matrix.hpp"
#include "stressfuse/featex/matrix.hpp"

namespace stressfuse::select {

enum class CorrKind { kPearson, kSpearman };

// |corr(column, y)| per column; constant columns score 0.
std::vector<double> corr_scores(const Matrix& x, std::span<const int> y, CorrKind kind);

// Population variance per column.
std::vector<double> variance_scores(const Matrix& x);

// Fractional (average) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> v);

struct LassoOptions {
  double tol = 1e-7;
  int max_sweeps = 100000;
};

struct LassoFit {
  std::vector<double> beta;
  double intercept = 0.0;
  int sweeps = 0;
  bool converged = false;
};

// Minimizes (1/2n)||y - X b - b0||^2 + lambda ||b||_1 by cyclic coordinate
// descent. X is expected column-standardized but any finite X works.
// warm_start, when non-empty, seeds the coefficients.
LassoFit lasso_fit(const Matrix& x, std::span<const double> y, double lambda, const LassoOptions& opts = {},
                   std::span<const double> warm_start = {});

// Smallest lambda at which every coefficient is zero: max_j |<x_j, y - mean(y)>| / n.
double lasso_lambda_max(const Matrix& x, std::span<const double> y);

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 8;
  int min_leaf = 5;
  int features_per_split = 0;  // 0 means floor(sqrt(p))
  std::uint64_t seed = 1;
  bool parallel = true;
};

// Gini impurity decrease per feature summed over a bootstrap forest and
// normalized to sum 1. A forest that never splits yields uniform scores.
std::vector<double> rf_importance(const Matrix& x, std::span<const int> y, const ForestConfig& cfg = {});

struct SelectionReport {
  std::string method;
  std::size_t k = 0;
  std::vector<std::string> feature_names;  // all candidate columns
  std::vector<double> scores;              // one per candidate column
  std::vector<std::size_t> selected;       // best first
  std::vector<std::size_t> ranking;        // every column, best first

  std::vector<std::string> selected_names() const;
  // {"method", "k", "selected": [...], "ranked": [{"name", "score"}, ...]}
  nlohmann::json to_json(std::size_t top = 0) const;
};

inline constexpr double kRfeRidge = 1e-3;

// Ridge-based recursive elimination on column-standardized X. Rank 1 is the
// strongest survivor; the first eliminated column ranks last. Scores are
// p - rank + 1.
SelectionReport rfe(const Matrix& x, std::span<const double> y, std::size_t k, std::size_t step = 1);

inline constexpr std::string_view kMethodNames[] = {"pearson", "spearman", "variance", "lasso", "rf", "rfe"};

struct SelectOptions {
  ForestConfig forest;
  LassoOptions lasso;
  // Unnormalized values of the same rows and columns; variance scoring uses
  // them when present.
  const Matrix* raw_values = nullptr;
};

struct Selection {
  featex::FeatureMatrix matrix;
  SelectionReport report;
};

// Fits on the given matrix only and keeps the top-k columns, best first.
// k larger than the column count is clamped with a warning.
Selection select(const featex::FeatureMatrix& m, std::string_view method, std::size_t k,
                 const SelectOptions& opts = {});

// Ranks indices by descending score, ties by ascending index.
std::vector<std::size_t> rank_by_score(std::span<const double> scores);

// Column standardization fitted on training rows. Remembers which subjects
// it saw so callers can assert a held-out subject was not among them.
class Standardizer {
 public:
  void fit(const Matrix& x, std::span<const std::string> subject_ids = {});
  Matrix transform(const Matrix& x) const;
  Matrix fit_transform(const Matrix& x, std::span<const std::string> subject_ids = {});

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& scale() const { return scale_; }
  const std::set<std::string>& fit_subjects() const { return subjects_; }
  bool fitted() const { return !mean_.empty(); }

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;  // 1 for constant columns
  std::set<std::string> subjects_;
};

}  // namespace stressfuse::select

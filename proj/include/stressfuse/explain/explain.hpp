#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stressfuse/common/matrix.hpp"

namespace stressfuse::explain {

// Additive attribution of one prediction of a linear model:
// prediction = base_value + sum(phi).
struct Explanation {
  double base_value = 0.0;
  std::vector<double> phi;
  std::vector<std::string> names;
  double prediction = 0.0;

  nlohmann::json to_json() const;
};

// Exact SHAP values of f(x) = beta . x + intercept with an independent
// background: phi_j = beta_j (x_j - mean_j), base = beta . mean + intercept.
class LinearExplainer {
 public:
  LinearExplainer(std::vector<double> beta, double intercept, const Matrix& background,
                  std::vector<std::string> names = {});

  Explanation explain(std::span<const double> x) const;
  std::vector<Explanation> explain_rows(const Matrix& x) const;

  double base_value() const { return base_; }
  const std::vector<double>& background_mean() const { return mean_; }

 private:
  std::vector<double> beta_;
  double intercept_;
  std::vector<double> mean_;
  std::vector<std::string> names_;
  double base_ = 0.0;
};

Explanation linear_shap(std::span<const double> beta, double intercept, const Matrix& background,
                        std::span<const double> x_row);

struct FeatureSummary {
  std::string name;
  std::size_t index = 0;
  double mean_abs_phi = 0.0;
  double positive_fraction = 0.0;  // share of rows with phi > 0
};

// Features by descending mean |phi|, ties by ascending index.
std::vector<FeatureSummary> summary_ranking(std::span<const Explanation> explanations);

// feature,mean_abs_phi,positive_fraction
void write_summary_csv(const std::filesystem::path& path, std::span<const FeatureSummary> summary);
// Top contributions of one row as signed horizontal bars around the base value.
void write_force_svg(const std::filesystem::path& path, const Explanation& e, std::size_t top = 15);

}  // namespace stressfuse::explain

#include "stressfuse/explain/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "stressfuse/common/error.hpp"
#include "stressfuse/common/svg.hpp"

namespace stressfuse::explain {

nlohmann::json Explanation::to_json() const {
  nlohmann::json contrib = nlohmann::json::array();
  for (std::size_t j = 0; j < phi.size(); ++j) {
    contrib.push_back({{"feature", j < names.size() ? names[j] : std::to_string(j)}, {"phi", phi[j]}});
  }
  return {{"base_value", base_value}, {"prediction", prediction}, {"contributions", contrib}};
}

LinearExplainer::LinearExplainer(std::vector<double> beta, double intercept, const Matrix& background,
                                 std::vector<std::string> names)
    : beta_(std::move(beta)), intercept_(intercept), names_(std::move(names)) {
  if (background.rows == 0) throw ShapeError("background set is empty");
  if (background.cols != beta_.size()) throw ShapeError("background width does not match the coefficient count");
  if (!names_.empty() && names_.size() != beta_.size()) throw ShapeError("name count does not match coefficients");
  mean_.assign(beta_.size(), 0.0);
  for (std::size_t r = 0; r < background.rows; ++r) {
    const auto row = background.row(r);
    for (std::size_t j = 0; j < mean_.size(); ++j) mean_[j] += row[j];
  }
  for (double& m : mean_) m /= static_cast<double>(background.rows);
  base_ = intercept_;
  for (std::size_t j = 0; j < beta_.size(); ++j) base_ += beta_[j] * mean_[j];
}

Explanation LinearExplainer::explain(std::span<const double> x) const {
  if (x.size() != beta_.size()) throw ShapeError("row width does not match the coefficient count");
  Explanation e;
  e.base_value = base_;
  e.names = names_;
  e.phi.resize(x.size());
  e.prediction = intercept_;
  for (std::size_t j = 0; j < x.size(); ++j) {
    e.phi[j] = beta_[j] == 0.0 ? 0.0 : beta_[j] * (x[j] - mean_[j]);
    e.prediction += beta_[j] * x[j];
  }
  return e;
}

std::vector<Explanation> LinearExplainer::explain_rows(const Matrix& x) const {
  std::vector<Explanation> out(x.rows);
  const auto n = static_cast<long>(x.rows);
#pragma omp parallel for schedule(static)
  for (long r = 0; r < n; ++r) out[static_cast<std::size_t>(r)] = explain(x.row(static_cast<std::size_t>(r)));
  return out;
}

Explanation linear_shap(std::span<const double> beta, double intercept, const Matrix& background,
                        std::span<const double> x_row) {
  return LinearExplainer({beta.begin(), beta.end()}, intercept, background).explain(x_row);
}

std::vector<FeatureSummary> summary_ranking(std::span<const Explanation> explanations) {
  if (explanations.empty()) return {};
  const std::size_t p = explanations.front().phi.size();
  std::vector<FeatureSummary> out(p);
  for (std::size_t j = 0; j < p; ++j) {
    out[j].index = j;
    const auto& names = explanations.front().names;
    out[j].name = j < names.size() ? names[j] : std::to_string(j);
  }
  for (const auto& e : explanations) {
    if (e.phi.size() != p) throw ShapeError("explanations differ in width");
    for (std::size_t j = 0; j < p; ++j) {
      out[j].mean_abs_phi += std::abs(e.phi[j]);
      if (e.phi[j] > 0.0) out[j].positive_fraction += 1.0;
    }
  }
  const double n = static_cast<double>(explanations.size());
  for (auto& s : out) {
    s.mean_abs_phi /= n;
    s.positive_fraction /= n;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FeatureSummary& a, const FeatureSummary& b) { return a.mean_abs_phi > b.mean_abs_phi; });
  return out;
}

void write_summary_csv(const std::filesystem::path& path, std::span<const FeatureSummary> summary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "feature,mean_abs_phi,positive_fraction\n";
  char buf[96];
  for (const auto& s : summary) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", s.mean_abs_phi, s.positive_fraction);
    out << s.name << buf;
  }
}

void write_force_svg(const std::filesystem::path& path, const Explanation& e, std::size_t top) {
  std::vector<std::size_t> order(e.phi.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(e.phi[a]) > std::abs(e.phi[b]); });
  order.resize(std::min(order.size(), top));
  std::vector<std::string> labels;
  std::vector<double> values;
  for (std::size_t j : order) {
    labels.push_back(j < e.names.size() ? e.names[j] : std::to_string(j));
    values.push_back(e.phi[j]);
  }
  char title[128];
  std::snprintf(title, sizeof title, "base %.4f -> prediction %.4f", e.base_value, e.prediction);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << svg::signed_hbars(title, labels, values);
}

}  // namespace stressfuse::explain

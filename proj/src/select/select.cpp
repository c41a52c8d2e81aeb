#include "stressfuse/select/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stressfuse/common/error.hpp"
#include "stressfuse/common/log.hpp"

namespace stressfuse::select {
namespace {

std::size_t count_nonzero(const std::vector<double>& b) {
  return static_cast<std::size_t>(std::count_if(b.begin(), b.end(), [](double v) { return v != 0.0; }));
}

// Largest lambda on the path with at least k nonzero coefficients, found by
// a geometric walk down from lambda_max and then bisection in log-lambda.
// Returns the selected columns best first and |beta| as scores.
std::pair<std::vector<std::size_t>, std::vector<double>> lasso_top_k(const Matrix& xs, std::span<const double> y,
                                                                     std::size_t k, const LassoOptions& opts) {
  constexpr double kShrink = 0.85;
  constexpr double kFloor = 1e-4;
  constexpr int kBisections = 8;
  const double lmax = lasso_lambda_max(xs, y);

  LassoFit best;
  best.beta.assign(xs.cols, 0.0);
  bool found = false;
  double hi = lmax;  // nnz < k here
  double lo = lmax;
  if (lmax > 0.0) {
    LassoFit prev = best;
    for (double lam = lmax * kShrink; lam >= lmax * kFloor; lam *= kShrink) {
      LassoFit f = lasso_fit(xs, y, lam, opts, prev.beta);
      if (count_nonzero(f.beta) >= k) {
        best = std::move(f);
        lo = lam;
        found = true;
        break;
      }
      hi = lam;
      prev = std::move(f);
      best = prev;
    }
    if (found) {
      for (int i = 0; i < kBisections; ++i) {
        const double mid = std::sqrt(hi * lo);
        LassoFit f = lasso_fit(xs, y, mid, opts, best.beta);
        if (count_nonzero(f.beta) >= k) {
          best = std::move(f);
          lo = mid;
        } else {
          hi = mid;
        }
      }
    }
  }

  std::vector<double> scores(xs.cols);
  for (std::size_t c = 0; c < xs.cols; ++c) scores[c] = std::abs(best.beta[c]);
  std::vector<std::size_t> order = rank_by_score(scores);
  const std::size_t nnz = count_nonzero(best.beta);
  if (nnz < k) {
    // The path bottomed out before k columns entered: fill by the magnitude
    // of the loss gradient at the final fit.
    log_warn("lasso path reached only " + std::to_string(nnz) + " nonzero coefficients; filling to k by gradient");
    const double n = static_cast<double>(xs.rows);
    std::vector<double> resid(xs.rows);
    for (std::size_t r = 0; r < xs.rows; ++r) {
      double pred = best.intercept;
      for (std::size_t c = 0; c < xs.cols; ++c) pred += xs(r, c) * best.beta[c];
      resid[r] = y[r] - pred;
    }
    std::vector<double> grad(xs.cols, -1.0);
    for (std::size_t c = 0; c < xs.cols; ++c) {
      if (best.beta[c] != 0.0) continue;
      double g = 0.0;
      for (std::size_t r = 0; r < xs.rows; ++r) g += xs(r, c) * resid[r];
      grad[c] = std::abs(g) / n;
    }
    std::vector<std::size_t> rest = rank_by_score(grad);
    order.resize(nnz);
    for (auto c : rest)
      if (best.beta[c] == 0.0) order.push_back(c);
  }
  return {order, scores};
}

}  // namespace

std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

std::vector<std::string> SelectionReport::selected_names() const {
  std::vector<std::string> out;
  for (auto c : selected) out.push_back(feature_names.at(c));
  return out;
}

nlohmann::json SelectionReport::to_json(std::size_t top) const {
  nlohmann::json ranked = nlohmann::json::array();
  const std::size_t n = top == 0 ? ranking.size() : std::min(top, ranking.size());
  for (std::size_t i = 0; i < n; ++i)
    ranked.push_back({{"name", feature_names.at(ranking[i])}, {"score", scores.at(ranking[i])}});
  return {{"method", method}, {"k", k}, {"selected", selected_names()}, {"ranked", ranked}};
}

void Standardizer::fit(const Matrix& x, std::span<const std::string> subject_ids) {
  if (x.rows == 0) throw EmptyMatrixError("cannot fit a standardizer on zero rows");
  const double n = static_cast<double>(x.rows);
  mean_.assign(x.cols, 0.0);
  scale_.assign(x.cols, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) mean_[c] += x(r, c);
  for (auto& m : mean_) m /= n;
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) {
      const double d = x(r, c) - mean_[c];
      scale_[c] += d * d;
    }
  for (auto& s : scale_) {
    s = std::sqrt(s / n);
    if (!(s > 1e-12)) s = 1.0;
  }
  subjects_ = std::set<std::string>(subject_ids.begin(), subject_ids.end());
}

Matrix Standardizer::transform(const Matrix& x) const {
  if (x.cols != mean_.size()) throw ShapeError("standardizer column count mismatch");
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) out(r, c) = (x(r, c) - mean_[c]) / scale_[c];
  return out;
}

Matrix Standardizer::fit_transform(const Matrix& x, std::span<const std::string> subject_ids) {
  fit(x, subject_ids);
  return transform(x);
}

Selection select(const featex::FeatureMatrix& m, std::string_view method, std::size_t k, const SelectOptions& opts) {
  if (k == 0) throw SpecError("k must be positive");
  if (m.cols() == 0) throw EmptyMatrixError("matrix has no columns");
  if (k > m.cols()) {
    log_warn("k = " + std::to_string(k) + " exceeds " + std::to_string(m.cols()) + " features; clamped");
    k = m.cols();
  }
  std::vector<double> yd(m.labels.begin(), m.labels.end());

  SelectionReport rep;
  rep.method = std::string(method);
  rep.k = k;
  rep.feature_names = m.feature_names;
  if (method == "pearson" || method == "spearman") {
    rep.scores = corr_scores(m.values, m.labels, method == "pearson" ? CorrKind::kPearson : CorrKind::kSpearman);
  } else if (method == "variance") {
    const Matrix& v = opts.raw_values ? *opts.raw_values : m.values;
    if (v.rows != m.rows() || v.cols != m.cols()) throw ShapeError("raw values do not match the matrix shape");
    rep.scores = variance_scores(v);
  } else if (method == "lasso") {
    Standardizer s;
    const Matrix xs = s.fit_transform(m.values);
    auto [order, scores] = lasso_top_k(xs, yd, k, opts.lasso);
    rep.scores = std::move(scores);
    rep.ranking = std::move(order);
    // Columns that never entered follow in score (then index) order.
    std::vector<bool> seen(m.cols(), false);
    for (auto c : rep.ranking) seen[c] = true;
    for (auto c : rank_by_score(rep.scores))
      if (!seen[c]) rep.ranking.push_back(c);
  } else if (method == "rf") {
    rep.scores = rf_importance(m.values, m.labels, opts.forest);
  } else if (method == "rfe") {
    Standardizer s;
    const Matrix xs = s.fit_transform(m.values);
    auto r = rfe(xs, yd, k);
    rep.scores = std::move(r.scores);
    rep.ranking = std::move(r.ranking);
  } else {
    throw SpecError("unknown selection method: " + std::string(method));
  }
  if (rep.ranking.empty()) rep.ranking = rank_by_score(rep.scores);
  rep.selected.assign(rep.ranking.begin(), rep.ranking.begin() + static_cast<std::ptrdiff_t>(k));

  Selection out{m.select_cols(rep.selected), std::move(rep)};
  return out;
}

}  // namespace stressfuse::select

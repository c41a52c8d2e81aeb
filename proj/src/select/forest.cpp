#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "stressfuse/common/error.hpp"
#include "stressfuse/common/rng.hpp"
#include "stressfuse/select/select.hpp"

namespace stressfuse::select {
namespace {

constexpr int kClasses = 3;
using Counts = std::array<double, kClasses>;

double gini(const Counts& c, double n) {
  if (n <= 0.0) return 0.0;
  double s = 1.0;
  for (double v : c) s -= (v / n) * (v / n);
  return s;
}

struct TreeBuilder {
  const Matrix& x;
  std::span<const int> y;
  const ForestConfig& cfg;
  std::size_t mtry;
  double total;  // bootstrap sample size
  Rng rng;
  std::vector<double>& importance;
  std::vector<std::size_t> features;
  std::vector<std::pair<double, int>> buf;

  void grow(std::vector<std::size_t>& idx, int depth) {
    const std::size_t m = idx.size();
    Counts counts{};
    for (auto i : idx) counts[static_cast<std::size_t>(y[i])] += 1.0;
    const double md = static_cast<double>(m);
    const double node_gini = gini(counts, md);
    if (depth >= cfg.max_depth || node_gini <= 0.0 || m < 2 * static_cast<std::size_t>(cfg.min_leaf)) return;

    // Random feature subset by partial Fisher-Yates.
    for (std::size_t t = 0; t < mtry; ++t) {
      const auto j = t + rng.below(features.size() - t);
      std::swap(features[t], features[j]);
    }

    double best_gain = 0.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    const std::size_t min_leaf = static_cast<std::size_t>(cfg.min_leaf);
    for (std::size_t t = 0; t < mtry; ++t) {
      const std::size_t f = features[t];
      buf.clear();
      for (auto i : idx) buf.emplace_back(x(i, f), y[i]);
      std::sort(buf.begin(), buf.end());
      Counts left{};
      for (std::size_t s = 0; s + 1 < m; ++s) {
        left[static_cast<std::size_t>(buf[s].second)] += 1.0;
        const std::size_t nl = s + 1;
        if (buf[s].first == buf[s + 1].first) continue;
        if (nl < min_leaf || m - nl < min_leaf) continue;
        Counts right{};
        for (int c = 0; c < kClasses; ++c) right[c] = counts[c] - left[c];
        const double nld = static_cast<double>(nl), nrd = md - nld;
        const double child = (nld * gini(left, nld) + nrd * gini(right, nrd)) / md;
        const double gain = node_gini - child;
        if (gain > best_gain + 1e-15) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (buf[s].first + buf[s + 1].first);
        }
      }
    }
    if (!(best_gain > 0.0)) return;
    importance[best_feature] += md / total * best_gain;

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : idx) (x(i, best_feature) <= best_threshold ? left_idx : right_idx).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    grow(left_idx, depth + 1);
    grow(right_idx, depth + 1);
  }
};

std::vector<double> grow_tree(const Matrix& x, std::span<const int> y, const ForestConfig& cfg, std::size_t mtry,
                              std::size_t tree) {
  Rng rng = Rng(cfg.seed).split("forest").split(tree);
  std::vector<double> importance(x.cols, 0.0);
  std::vector<std::size_t> idx(x.rows);
  for (auto& i : idx) i = static_cast<std::size_t>(rng.below(x.rows));
  std::sort(idx.begin(), idx.end());
  TreeBuilder b{x, y, cfg, mtry, static_cast<double>(x.rows), rng, importance, {}, {}};
  b.features.resize(x.cols);
  std::iota(b.features.begin(), b.features.end(), 0);
  b.grow(idx, 0);
  return importance;
}

}  // namespace

std::vector<double> rf_importance(const Matrix& x, std::span<const int> y, const ForestConfig& cfg) {
  if (y.size() != x.rows) throw ShapeError("label count does not match row count");
  if (cfg.n_trees < 1 || cfg.max_depth < 1 || cfg.min_leaf < 1) throw SpecError("invalid forest configuration");
  if (x.rows < static_cast<std::size_t>(cfg.min_leaf)) throw DataError("fewer rows than min_leaf");
  if (x.cols == 0) throw EmptyMatrixError("no feature columns");
  for (int l : y)
    if (l < 0 || l >= kClasses) throw LabelError("label outside {0,1,2}");
  const std::size_t mtry =
      cfg.features_per_split > 0
          ? std::min<std::size_t>(static_cast<std::size_t>(cfg.features_per_split), x.cols)
          : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.cols)))));

  const auto n_trees = static_cast<std::size_t>(cfg.n_trees);
  std::vector<std::vector<double>> per_tree(n_trees);
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
  for (std::int64_t t = 0; t < static_cast<std::int64_t>(n_trees); ++t)
    per_tree[static_cast<std::size_t>(t)] = grow_tree(x, y, cfg, mtry, static_cast<std::size_t>(t));

  std::vector<double> total(x.cols, 0.0);
  for (const auto& imp : per_tree)
    for (std::size_t c = 0; c < x.cols; ++c) total[c] += imp[c];
  const double sum = std::accumulate(total.begin(), total.end(), 0.0);
  if (!(sum > 0.0)) return std::vector<double>(x.cols, 1.0 / static_cast<double>(x.cols));
  for (auto& v : total) v /= sum;
  return total;
}

}  // namespace stressfuse::select

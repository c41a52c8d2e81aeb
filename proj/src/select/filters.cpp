#include <algorithm>
#include <cmath>
#include <numeric>

#include "stressfuse/common/error.hpp"
#include "stressfuse/select/select.hpp"

namespace stressfuse::select {
namespace {

double pearson_abs(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
  return std::min(1.0, std::abs(sab) / std::sqrt(saa * sbb));
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> corr_scores(const Matrix& x, std::span<const int> y, CorrKind kind) {
  if (x.rows < 2) throw LengthError("correlation scores need at least 2 rows");
  if (y.size() != x.rows) throw ShapeError("label count does not match row count");
  std::vector<double> yd(y.begin(), y.end());
  if (std::all_of(yd.begin(), yd.end(), [&](double v) { return v == yd[0]; }))
    throw DataError("correlation scores need at least 2 distinct labels");
  if (kind == CorrKind::kSpearman) yd = average_ranks(yd);
  std::vector<double> out(x.cols);
  for (std::size_t c = 0; c < x.cols; ++c) {
    auto col = x.column(c);
    if (kind == CorrKind::kSpearman) col = average_ranks(col);
    out[c] = pearson_abs(col, yd);
  }
  return out;
}

std::vector<double> variance_scores(const Matrix& x) {
  if (x.rows < 2) throw LengthError("variance scores need at least 2 rows");
  std::vector<double> out(x.cols);
  const double n = static_cast<double>(x.rows);
  for (std::size_t c = 0; c < x.cols; ++c) {
    const auto col = x.column(c);
    const double m = std::accumulate(col.begin(), col.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : col) ss += (v - m) * (v - m);
    out[c] = ss / n;
  }
  return out;
}

}  // namespace stressfuse::select

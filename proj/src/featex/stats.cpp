#include "stressfuse/featex/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "stressfuse/common/error.hpp"

namespace stressfuse::featex {
namespace {

struct Twiddles {
  std::vector<double> cos_table;
  std::vector<double> sin_table;
};

// cos/sin of 2*pi*m/n for m in [0, n).
const Twiddles& twiddles(std::size_t n) {
  thread_local std::unordered_map<std::size_t, Twiddles> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Twiddles t;
  t.cos_table.resize(n);
  t.sin_table.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
    t.cos_table[m] = std::cos(a);
    t.sin_table[m] = std::sin(a);
  }
  return cache.emplace(n, std::move(t)).first->second;
}

double periodogram_entropy(std::span<const double> x, double mean) {
  const std::size_t n = x.size();
  const auto& tw = twiddles(n);
  const std::size_t bins = n / 2 + 1;
  thread_local std::vector<double> power;
  power.assign(bins, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t m = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const double d = x[t] - mean;
      re += d * tw.cos_table[m];
      im -= d * tw.sin_table[m];
      m += k;
      if (m >= n) m -= n;
    }
    power[k] = re * re + im * im;
    total += power[k];
  }
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double p : power) {
    const double q = p / total;
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

}  // namespace

StatVector stat_features(std::span<const double> x, const StatParams& params) {
  const std::size_t n = x.size();
  if (n < 2) throw LengthError("window statistics need at least 2 samples");
  StatVector out{};
  const double nd = static_cast<double>(n);

  double sum = 0.0, sumsq = 0.0;
  double mx = x[0], mn = x[0];
  for (double v : x) {
    sum += v;
    sumsq += v * v;
    mx = std::max(mx, v);
    mn = std::min(mn, v);
  }
  out[static_cast<std::size_t>(Stat::kAbsEnergy)] = sumsq;
  out[static_cast<std::size_t>(Stat::kMax)] = mx;
  out[static_cast<std::size_t>(Stat::kMin)] = mn;

  if (mx == mn) {
    out[static_cast<std::size_t>(Stat::kQuantile)] = mx;
    out[static_cast<std::size_t>(Stat::kRms)] = std::abs(mx);
    out[static_cast<std::size_t>(Stat::kMean)] = mx;
    return out;
  }

  const double mean = sum / nd;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  double above = 0.0, below = 0.0;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
    if (v > mean) above += 1.0;
    if (v < mean) below += 1.0;
  }
  const double ss = m2;
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  const double sample_std = std::sqrt(ss / (nd - 1.0));

  double skew = 0.0, kurt = 0.0;
  if (m2 > 0.0) {
    if (n >= 3) skew = m3 / std::pow(m2, 1.5) * std::sqrt(nd * (nd - 1.0)) / (nd - 2.0);
    if (n >= 4) {
      const double g2 = m4 / (m2 * m2) - 3.0;
      kurt = ((nd + 1.0) * g2 + 6.0) * (nd - 1.0) / ((nd - 2.0) * (nd - 3.0));
    }
  }

  double acf = 0.0;
  const std::size_t lag = params.autocorr_lag;
  if (m2 > 0.0 && lag < n) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - mean) * (x[t + lag] - mean);
    acf = s / (static_cast<double>(n - lag) * m2);
  }

  thread_local std::vector<double> sorted;
  sorted.assign(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = params.quantile * (nd - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = pos - static_cast<double>(lo);
  const double quant = sorted[lo] + frac * (sorted[hi] - sorted[lo]);

  out[static_cast<std::size_t>(Stat::kFourierEntropy)] = periodogram_entropy(x, mean);
  out[static_cast<std::size_t>(Stat::kSkewness)] = skew;
  out[static_cast<std::size_t>(Stat::kAutocorrelation)] = acf;
  out[static_cast<std::size_t>(Stat::kQuantile)] = quant;
  out[static_cast<std::size_t>(Stat::kKurtosis)] = kurt;
  out[static_cast<std::size_t>(Stat::kCountAboveMean)] = above;
  out[static_cast<std::size_t>(Stat::kCountBelowMean)] = below;
  out[static_cast<std::size_t>(Stat::kVariationCoefficient)] = mean == 0.0 ? 0.0 : sample_std / mean;
  out[static_cast<std::size_t>(Stat::kRms)] = std::sqrt(sumsq / nd);
  out[static_cast<std::size_t>(Stat::kVariance)] = m2;
  out[static_cast<std::size_t>(Stat::kMean)] = mean;
  out[static_cast<std::size_t>(Stat::kStd)] = sample_std;
  return out;
}

}  // namespace stressfuse::featex

#include "stressfuse/edaproc/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stressfuse/common/error.hpp"

namespace stressfuse::edaproc {
namespace {

void run(const Biquad& f, std::vector<double>& x) {
  if (x.empty()) return;
  const double g = f.dc_gain();
  // Steady state for a constant input equal to x[0].
  double z2 = (f.b2 - f.a2 * g) * x[0];
  double z1 = (f.b1 - f.a1 * g) * x[0] + z2;
  for (double& v : x) {
    const double in = v;
    const double y = f.b0 * in + z1;
    z1 = f.b1 * in - f.a1 * y + z2;
    z2 = f.b2 * in - f.a2 * y;
    v = y;
  }
}

}  // namespace

Biquad butterworth_lowpass(double cutoff_hz, double fs) {
  if (!(fs > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * fs)) {
    throw SpecError("butterworth cutoff must lie in (0, fs/2)");
  }
  const double k = std::tan(std::numbers::pi * cutoff_hz / fs);
  const double k2 = k * k;
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k2);
  Biquad f;
  f.b0 = k2 * norm;
  f.b1 = 2.0 * f.b0;
  f.b2 = f.b0;
  f.a1 = 2.0 * (k2 - 1.0) * norm;
  f.a2 = (1.0 - std::numbers::sqrt2 * k + k2) * norm;
  return f;
}

std::vector<double> lfilter(const Biquad& f, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  run(f, y);
  return y;
}

std::vector<double> filtfilt(const Biquad& f, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  const std::size_t pad = std::min<std::size_t>(9, n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run(f, ext);
  std::reverse(ext.begin(), ext.end());
  run(f, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<long>(pad), ext.begin() + static_cast<long>(pad + n)};
}

}  // namespace stressfuse::edaproc

#include "stressfuse/sigcore/resample.hpp"

#include <cmath>

#include "stressfuse/common/error.hpp"

namespace stressfuse::sigcore {
namespace {

// First input index belonging to output block k.
std::size_t block_start(std::size_t k, double ratio) {
  const double exact = static_cast<double>(k) * ratio;
  const double r = std::round(exact);
  if (std::abs(exact - r) <= 1e-9 * std::max(1.0, exact)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(exact));
}

void check_rates(std::size_t n, double from_hz, double to_hz) {
  if (!(to_hz > 0.0) || !(from_hz > 0.0)) throw SpecError("sample rates must be positive");
  if (to_hz > from_hz) throw UnsupportedError("upsampling is not supported");
  if (n == 0) throw FormatError("cannot resample an empty series");
}

}  // namespace

Series resample_mean(std::span<const double> series, double from_hz, double to_hz) {
  check_rates(series.size(), from_hz, to_hz);
  if (from_hz == to_hz) return Series(series.begin(), series.end());
  const double ratio = from_hz / to_hz;
  const auto out_len = static_cast<std::size_t>(
      std::floor(static_cast<double>(series.size()) * to_hz / from_hz + 1e-9));
  Series out(out_len);
  for (std::size_t k = 0; k < out_len; ++k) {
    const std::size_t lo = block_start(k, ratio);
    const std::size_t hi = std::min(block_start(k + 1, ratio), series.size());
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += series[i];
    out[k] = hi > lo ? sum / static_cast<double>(hi - lo) : std::nan("");
  }
  return out;
}

std::vector<Frame> resample_frames(const std::vector<Frame>& frames, double from_hz, double to_hz) {
  check_rates(frames.size(), from_hz, to_hz);
  if (from_hz == to_hz) return frames;
  const double ratio = from_hz / to_hz;
  const auto out_len = static_cast<std::size_t>(
      std::floor(static_cast<double>(frames.size()) * to_hz / from_hz + 1e-9));
  std::vector<Frame> out(out_len);
  for (std::size_t k = 0; k < out_len; ++k) {
    const std::size_t lo = block_start(k, ratio);
    const std::size_t hi = std::min(block_start(k + 1, ratio), frames.size());
    const double inv = 1.0 / static_cast<double>(hi - lo);
    for (std::size_t p = 0; p < kLandmarkCount; ++p) {
      double sx = 0.0, sy = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        sx += frames[i][p].x;
        sy += frames[i][p].y;
      }
      out[k][p] = {sx * inv, sy * inv};
    }
  }
  return out;
}

}  // namespace stressfuse::sigcore

#include "stressfuse/kernels/window_stats.hpp"

#include <cstdint>

namespace stressfuse::kernels {
namespace {

void fill_cell(std::span<const std::span<const double>> series, std::span<const featex::Window> windows,
               const featex::StatParams& params, std::size_t w, std::size_t s, Matrix& out) {
  const auto& win = windows[w];
  const auto stats = featex::stat_features(series[s].subspan(win.start, win.end - win.start), params);
  double* dst = &out(w, s * featex::kStatCount);
  for (std::size_t k = 0; k < featex::kStatCount; ++k) dst[k] = stats[k];
}

}  // namespace

Matrix window_stats(std::span<const std::span<const double>> series, std::span<const featex::Window> windows,
                    const featex::StatParams& params) {
  Matrix out(windows.size(), series.size() * featex::kStatCount);
  const auto cells = static_cast<std::int64_t>(windows.size() * series.size());
  const std::size_t ns = series.size();
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < cells; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    fill_cell(series, windows, params, cu / ns, cu % ns, out);
  }
  return out;
}

Matrix window_stats_serial(std::span<const std::span<const double>> series, std::span<const featex::Window> windows,
                           const featex::StatParams& params) {
  Matrix out(windows.size(), series.size() * featex::kStatCount);
  for (std::size_t w = 0; w < windows.size(); ++w)
    for (std::size_t s = 0; s < series.size(); ++s) fill_cell(series, windows, params, w, s, out);
  return out;
}

}  // namespace stressfuse::kernels

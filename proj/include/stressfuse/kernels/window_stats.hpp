#pragma once

#include <span>

#include "stressfuse/common/matrix.hpp"
#include "stressfuse/featex/stats.hpp"
#include "stressfuse/featex/windows.hpp"

namespace stressfuse::kernels {

// out(w, s * kStatCount + k) = stat k of series s over window w.
// Every window must lie inside every series and hold finite values.
Matrix window_stats(std::span<const std::span<const double>> series, std::span<const featex::Window> windows,
                    const featex::StatParams& params);

// Single-threaded reference with the same output layout.
Matrix window_stats_serial(std::span<const std::span<const double>> series, std::span<const featex::Window> windows,
                           const featex::StatParams& params);

}  // namespace stressfuse::kernels

#pragma once

#include <span>
#include <vector>

#include "stressfuse/sigcore/types.hpp"

namespace stressfuse::sigcore {

// Block-mean decimation. Output sample k is the mean of every input sample
// whose timestamp i/from_hz lies in [k/to_hz, (k+1)/to_hz). Output length is
// floor(len * to_hz / from_hz). NaN inputs propagate into their block.
Series resample_mean(std::span<const double> series, double from_hz, double to_hz);

std::vector<Frame> resample_frames(const std::vector<Frame>& frames, double from_hz, double to_hz);

}  // namespace stressfuse::sigcore

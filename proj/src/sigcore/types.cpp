#include "stressfuse/sigcore/types.hpp"

#include <algorithm>
#include <cmath>

#include "stressfuse/common/error.hpp"

namespace stressfuse::sigcore {

bool is_known_channel(std::string_view name) {
  return std::find(kChannelNames.begin(), kChannelNames.end(), name) != kChannelNames.end();
}

std::size_t Recording::length() const {
  return channels.empty() ? 0 : channels.begin()->second.size();
}

void Recording::validate() const {
  if (!(sample_rate_hz > 0.0)) throw SpecError("recording sample rate must be positive");
  const std::size_t n = length();
  for (const auto& [name, series] : channels) {
    if (series.size() != n) throw SchemaError("channel " + name + " length differs from the others");
  }
}

void LandmarkTrack::validate() const {
  if (!(sample_rate_hz > 0.0)) throw SpecError("landmark sample rate must be positive");
  for (const auto& f : frames) {
    for (const auto& p : f) {
      if (std::isinf(p.x) || std::isinf(p.y)) throw FormatError("landmark coordinate is infinite");
    }
  }
}

void StressTrace::validate() const {
  if (!(sample_rate_hz > 0.0)) throw SpecError("stress sample rate must be positive");
  for (double v : values) {
    if (std::isnan(v)) continue;
    if (v < kStressMin || v > kStressMax) throw LabelError("stress value outside [0, 19]");
  }
}

void AlignedSession::validate() const {
  const std::size_t n = stress.size();
  if (rate_hz != 1.0) throw AlignmentError("aligned session must be at 1 Hz");
  if (landmarks.size() != n) throw AlignmentError("landmark length differs from stress length");
  for (const auto& [name, series] : channels) {
    if (series.size() != n) throw AlignmentError("channel " + name + " length differs");
  }
}

}  // namespace stressfuse::sigcore

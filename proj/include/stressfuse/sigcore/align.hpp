#pragma once

#include "stressfuse/sigcore/types.hpp"

namespace stressfuse::sigcore {

// Brings the three streams of one session onto a positional 1 Hz timeline.
// Inputs above 1 Hz are block-mean resampled first; everything is then
// truncated to the shortest stream.
AlignedSession align(const Recording& recording, const LandmarkTrack& landmarks, const StressTrace& stress);

// Re-aligns an already aligned session; returns an equal session.
AlignedSession align(const AlignedSession& session);

}  // namespace stressfuse::sigcore

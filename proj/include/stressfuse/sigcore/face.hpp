#pragma once

#include <cstddef>

#include "stressfuse/sigcore/types.hpp"

namespace stressfuse::sigcore {

// Index of the bilaterally mirrored landmark (e.g. 36 <-> 45). Midline points
// map to themselves.
std::size_t mirror_landmark(std::size_t i);

// Neutral frontal face in template units: origin between the eyes' level and
// nose, x to the image right, y down, inter-ocular distance 0.9. Exactly
// symmetric under mirror_landmark with x -> -x.
const Frame& canonical_face();

// Displacement of a tense expression (lowered and knitted brows, narrowed
// eyes, pressed and narrowed mouth) in template units. Also exactly symmetric.
const Frame& tense_expression_delta();

}  // namespace stressfuse::sigcore

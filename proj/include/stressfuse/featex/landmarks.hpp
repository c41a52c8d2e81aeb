#pragma once

#include <array>
#include <string_view>

#include "stressfuse/sigcore/types.hpp"

namespace stressfuse::featex {

inline constexpr std::size_t kGeometryCount = 30;

// Fixed set of scale-free face geometry scalars. Unless stated, a value is
// a Euclidean distance divided by the inter-ocular distance D (distance
// between the centroids of points 36-41 and 42-47). Point indices follow
// the 68-point ordering.
//
//   0  ear_right        (|37-41| + |38-40|) / (2 |36-39|)
//   1  ear_left         (|43-47| + |44-46|) / (2 |42-45|)
//   2  eye_open_right   (|37-41| + |38-40|) / 2
//   3  eye_open_left    (|43-47| + |44-46|) / 2
//   4  mouth_width      |48-54|
//   5  mouth_height     |51-57|
//   6  mouth_aspect     |51-57| / |48-54|
//   7  brow_eye_inner_right  |21-39|
//   8  brow_eye_inner_left   |22-42|
//   9  brow_eye_outer_right  |17-36|
//  10  brow_eye_outer_left   |26-45|
//  11  brow_tilt        ((y17 - y21) + (y26 - y22)) / 2, signed, y down
//  12  nose_chin        |33-8|
//  13  jaw_width        |0-16|
//  14  mouth_asymmetry  |48-33| - |54-33|, signed
//  15  interocular      D / |0-16|
//  16  brow_gap         |21-22|
//  17  nose_width       |31-35|
//  18  nose_length      |27-33|
//  19  nose_lip         |33-51|
//  20  lip_chin         |57-8|
//  21  inner_mouth_open |62-66|
//  22  inner_mouth_width |60-64|
//  23  corner_eye_right |48-36|
//  24  corner_eye_left  |54-45|
//  25  jaw_nose_right   |4-30|
//  26  jaw_nose_left    |12-30|
//  27  brow_bridge_right |19-27|
//  28  brow_bridge_left  |24-27|
//  29  face_height      |8-27|
inline constexpr std::array<std::string_view, kGeometryCount> kGeometryNames = {
    "ear_right",       "ear_left",          "eye_open_right",       "eye_open_left",       "mouth_width",
    "mouth_height",    "mouth_aspect",      "brow_eye_inner_right", "brow_eye_inner_left", "brow_eye_outer_right",
    "brow_eye_outer_left", "brow_tilt",     "nose_chin",            "jaw_width",           "mouth_asymmetry",
    "interocular",     "brow_gap",          "nose_width",           "nose_length",         "nose_lip",
    "lip_chin",        "inner_mouth_open",  "inner_mouth_width",    "corner_eye_right",    "corner_eye_left",
    "jaw_nose_right",  "jaw_nose_left",     "brow_bridge_right",    "brow_bridge_left",    "face_height"};

// Throws DegenerateFrameError when the eye centroids coincide.
std::array<double, kGeometryCount> landmark_derived(const sigcore::Frame& frame);

}  // namespace stressfuse::featex

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace stressfuse::sigcore {

using Series = std::vector<double>;

// Wristband channels accepted in recordings. Units: HR bpm, EDA microsiemens,
// TEMP degrees C, ACC_* g. Units are carried as documentation only.
inline constexpr std::array<std::string_view, 6> kChannelNames = {"HR",    "EDA",   "TEMP",
                                                                  "ACC_X", "ACC_Y", "ACC_Z"};

bool is_known_channel(std::string_view name);

struct Recording {
  std::string subject_id;
  std::string session_id;
  double sample_rate_hz = 0.0;
  std::map<std::string, Series> channels;

  std::size_t length() const;
  void validate() const;
};

inline constexpr std::size_t kLandmarkCount = 68;

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// One video frame of landmarks in the 68-point ordering (jaw 0-16, brows
// 17-26, nose 27-35, eyes 36-47, mouth 48-67). NaN marks a missing frame.
using Frame = std::array<Point, kLandmarkCount>;

struct LandmarkTrack {
  std::string subject_id;
  std::string session_id;
  double sample_rate_hz = 0.0;
  std::vector<Frame> frames;

  void validate() const;
};

inline constexpr double kStressMin = 0.0;
inline constexpr double kStressMax = 19.0;

struct StressTrace {
  std::string subject_id;
  std::string session_id;
  double sample_rate_hz = 0.0;
  Series values;

  void validate() const;
};

// One subject-session with every stream on a shared 1 Hz timeline.
struct AlignedSession {
  std::string subject_id;
  std::string session_id;
  double rate_hz = 1.0;
  std::map<std::string, Series> channels;
  std::vector<Frame> landmarks;
  Series stress;

  std::size_t length() const { return stress.size(); }
  void validate() const;

  bool operator==(const AlignedSession&) const = default;
};

}  // namespace stressfuse::sigcore

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "stressfuse/sigcore/types.hpp"

namespace stressfuse::sigcore {

// Per-class generator parameters. Index 0/1/2 is the stress class. The
// standard profile makes the modalities complementary: biometric channels
// differ only between class 0 and classes {1,2}; facial geometry differs
// only between class 2 and classes {0,1}.
struct ClassProfile {
  std::string name = "standard";
  std::array<double, 3> class_weights{0.45, 0.10, 0.45};
  std::array<double, 3> stress_level{1.0, 10.0, 18.0};
  std::array<double, 3> hr_mean{72.0, 84.0, 84.0};
  std::array<double, 3> temp_mean{33.6, 33.1, 33.1};
  std::array<double, 3> acc_mean{0.05, -0.15, 0.98};  // x, y, z; shared by all classes
  std::array<double, 3> eda_level{2.0, 3.0, 3.0};
  std::array<double, 3> scr_rate_per_min{1.0, 4.0, 4.0};
  double scr_amplitude = 0.3;
  double scr_decay_s = 4.0;
  double eda_drift_amplitude = 0.2;
  double eda_drift_period_s = 240.0;
  std::array<double, 3> expression{0.0, 0.0, 1.0};

  // Noise and inter-subject spread, each multiplied by SynthSpec::noise_sigma.
  double hr_noise = 3.0;
  double temp_noise = 0.05;
  double acc_noise = 0.05;
  double eda_noise = 0.005;
  double landmark_noise_px = 0.8;
  double subject_hr_sd = 5.0;
  double subject_temp_sd = 0.4;
  double subject_eda_sd = 0.5;
  double subject_face_shift_px = 20.0;
  double subject_face_scale_sd = 0.08;
  double subject_face_shape_sd = 0.02;
  double head_drift_px = 1.5;

  static ClassProfile standard();
  // Biometric class information carried only by SCR rate, on a baseline with
  // large slow drift; classes balanced. Used for the EDA-component ablation.
  static ClassProfile scr_only();
  static ClassProfile named(const std::string& name);
};

struct SynthSpec {
  int n_subjects = 6;
  int session_seconds = 1200;
  int sessions_per_subject = 1;
  ClassProfile profile = ClassProfile::standard();
  double noise_sigma = 1.0;
  std::uint64_t seed = 7;
  double bio_rate_hz = 4.0;
  double landmark_rate_hz = 2.0;
  int segment_seconds = 120;
  // First segment is lengthened by this much so segment boundaries fall
  // between window steps rather than on them.
  int lead_in_seconds = 10;
  int min_window_seconds = 40;

  void validate() const;
};

// Streams of one generated session at their native rates, plus the class of
// every second.
struct RawSession {
  Recording recording;
  LandmarkTrack landmarks;
  StressTrace stress;
  std::vector<int> second_class;
};

std::vector<RawSession> synth_raw(const SynthSpec& spec);
std::vector<AlignedSession> synth_dataset(const SynthSpec& spec);

std::string subject_name(int index);

void to_json(nlohmann::json& j, const ClassProfile& p);
void from_json(const nlohmann::json& j, ClassProfile& p);
void to_json(nlohmann::json& j, const SynthSpec& s);
void from_json(const nlohmann::json& j, SynthSpec& s);

}  // namespace stressfuse::sigcore

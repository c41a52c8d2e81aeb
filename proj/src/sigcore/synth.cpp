#include "stressfuse/sigcore/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "stressfuse/common/error.hpp"
#include "stressfuse/common/rng.hpp"
#include "stressfuse/sigcore/align.hpp"
#include "stressfuse/sigcore/face.hpp"

namespace stressfuse::sigcore {
namespace {

constexpr double kFaceScalePx = 60.0;
constexpr double kFaceCenterX = 320.0;
constexpr double kFaceCenterY = 240.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Class counts proportional to weights by largest remainder; ties go to the
// lower class index.
std::array<int, 3> apportion(const std::array<double, 3>& w, int n) {
  const double total = w[0] + w[1] + w[2];
  std::array<int, 3> counts{};
  std::array<double, 3> rem{};
  int used = 0;
  for (int c = 0; c < 3; ++c) {
    const double q = w[c] / total * n;
    counts[c] = static_cast<int>(std::floor(q));
    rem[c] = q - counts[c];
    used += counts[c];
  }
  while (used < n) {
    int best = 0;
    for (int c = 1; c < 3; ++c) {
      if (rem[c] > rem[best]) best = c;
    }
    ++counts[best];
    rem[best] = -1.0;
    ++used;
  }
  return counts;
}

std::vector<int> second_labels(const SynthSpec& spec, Rng& rng) {
  const int T = spec.session_seconds;
  std::vector<int> bounds{0};
  int t = spec.lead_in_seconds + spec.segment_seconds;
  while (t < T) {
    bounds.push_back(t);
    t += spec.segment_seconds;
  }
  bounds.push_back(T);
  const int n_seg = static_cast<int>(bounds.size()) - 1;
  const auto counts = apportion(spec.profile.class_weights, n_seg);
  std::vector<int> seg_class;
  for (int c = 0; c < 3; ++c) seg_class.insert(seg_class.end(), counts[c], c);
  rng.shuffle(seg_class.begin(), seg_class.end());
  std::vector<int> labels(T);
  for (int s = 0; s < n_seg; ++s) {
    for (int i = bounds[s]; i < bounds[s + 1]; ++i) labels[i] = seg_class[s];
  }
  return labels;
}

struct Pulse {
  double onset;
  double rise;
  double amplitude;
};

double pulse_value(const Pulse& p, double t, double decay) {
  if (t < p.onset) return 0.0;
  const double dt = t - p.onset;
  if (dt < p.rise) return p.amplitude * 0.5 * (1.0 - std::cos(std::numbers::pi * dt / p.rise));
  return p.amplitude * std::exp(-(dt - p.rise) / decay);
}

RawSession make_session(const SynthSpec& spec, int subject, int session) {
  const ClassProfile& prof = spec.profile;
  const double sigma = spec.noise_sigma;
  const Rng subject_rng = Rng(spec.seed).split("subject").split(static_cast<std::uint64_t>(subject));
  Rng traits = subject_rng.split("traits");
  Rng srng = subject_rng.split("session").split(static_cast<std::uint64_t>(session));

  RawSession out;
  const std::string sid = subject_name(subject);
  const std::string sess = "session" + std::to_string(session + 1);

  Rng label_rng = srng.split("labels");
  out.second_class = second_labels(spec, label_rng);
  const auto& cls = out.second_class;
  const int T = spec.session_seconds;
  auto class_at = [&](double t) {
    const int s = std::clamp(static_cast<int>(std::floor(t)), 0, T - 1);
    return cls[static_cast<std::size_t>(s)];
  };

  // Subject-level traits are stable across sessions.
  const double hr_off = traits.normal() * prof.subject_hr_sd * sigma;
  const double temp_off = traits.normal() * prof.subject_temp_sd * sigma;
  const double eda_off = traits.normal() * prof.subject_eda_sd * sigma;
  const double face_dx = traits.normal() * prof.subject_face_shift_px * sigma;
  const double face_dy = traits.normal() * prof.subject_face_shift_px * sigma;
  const double face_scale = kFaceScalePx * (1.0 + traits.normal() * prof.subject_face_scale_sd * sigma);
  Frame shape = canonical_face();
  for (auto& p : shape) {
    p.x += traits.normal() * prof.subject_face_shape_sd * sigma;
    p.y += traits.normal() * prof.subject_face_shape_sd * sigma;
  }

  // Biometric channels.
  Rng pulse_rng = srng.split("scr");
  std::vector<Pulse> pulses;
  // Onsets arrive as a per-second Bernoulli process at the class rate.
  for (int sec = 0; sec < T; ++sec) {
    const double p = prof.scr_rate_per_min[static_cast<std::size_t>(cls[static_cast<std::size_t>(sec)])] / 60.0;
    const double u = pulse_rng.uniform();
    const double offset = pulse_rng.uniform();
    const double rise = pulse_rng.uniform(1.5, 3.0);
    const double amp = prof.scr_amplitude * pulse_rng.uniform(0.7, 1.3);
    if (u < p) pulses.push_back({sec + offset, rise, amp});
  }
  Rng drift_rng = srng.split("drift");
  const double ph1 = drift_rng.uniform(0.0, kTwoPi);
  const double ph2 = drift_rng.uniform(0.0, kTwoPi);
  const double hd_ph = drift_rng.uniform(0.0, kTwoPi);

  const auto n_bio = static_cast<std::size_t>(std::llround(T * spec.bio_rate_hz));
  Recording& rec = out.recording;
  rec.subject_id = sid;
  rec.session_id = sess;
  rec.sample_rate_hz = spec.bio_rate_hz;
  Series hr(n_bio), eda(n_bio), temp(n_bio), ax(n_bio), ay(n_bio), az(n_bio);
  Rng noise = srng.split("bio-noise");
  std::size_t first_pulse = 0;
  const double pulse_horizon = 3.0 + 10.0 * prof.scr_decay_s;
  for (std::size_t i = 0; i < n_bio; ++i) {
    const double t = static_cast<double>(i) / spec.bio_rate_hz;
    const auto c = static_cast<std::size_t>(class_at(t));
    hr[i] = prof.hr_mean[c] + hr_off + noise.normal() * prof.hr_noise * sigma;
    temp[i] = prof.temp_mean[c] + temp_off + noise.normal() * prof.temp_noise * sigma;
    ax[i] = prof.acc_mean[0] + noise.normal() * prof.acc_noise * sigma;
    ay[i] = prof.acc_mean[1] + noise.normal() * prof.acc_noise * sigma;
    az[i] = prof.acc_mean[2] + noise.normal() * prof.acc_noise * sigma;
    double phasic = 0.0;
    while (first_pulse < pulses.size() && pulses[first_pulse].onset + pulse_horizon < t) ++first_pulse;
    for (std::size_t p = first_pulse; p < pulses.size() && pulses[p].onset <= t; ++p) {
      phasic += pulse_value(pulses[p], t, prof.scr_decay_s);
    }
    const double drift = prof.eda_drift_amplitude *
                         (std::sin(kTwoPi * t / prof.eda_drift_period_s + ph1) +
                          0.5 * std::sin(kTwoPi * t / (2.7 * prof.eda_drift_period_s) + ph2));
    eda[i] = std::max(0.05, prof.eda_level[c] + eda_off + drift + phasic + noise.normal() * prof.eda_noise * sigma);
  }
  rec.channels = {{"HR", std::move(hr)},      {"EDA", std::move(eda)},     {"TEMP", std::move(temp)},
                  {"ACC_X", std::move(ax)},   {"ACC_Y", std::move(ay)},    {"ACC_Z", std::move(az)}};

  // Landmarks.
  const Frame& delta = tense_expression_delta();
  const auto n_lnd = static_cast<std::size_t>(std::llround(T * spec.landmark_rate_hz));
  LandmarkTrack& lnd = out.landmarks;
  lnd.subject_id = sid;
  lnd.session_id = sess;
  lnd.sample_rate_hz = spec.landmark_rate_hz;
  lnd.frames.resize(n_lnd);
  Rng lnoise = srng.split("landmark-noise");
  for (std::size_t i = 0; i < n_lnd; ++i) {
    const double t = static_cast<double>(i) / spec.landmark_rate_hz;
    const double expr = prof.expression[static_cast<std::size_t>(class_at(t))];
    const double hx = prof.head_drift_px * sigma * std::sin(kTwoPi * t / 90.0 + hd_ph);
    const double hy = prof.head_drift_px * sigma * std::cos(kTwoPi * t / 130.0 + hd_ph);
    for (std::size_t p = 0; p < kLandmarkCount; ++p) {
      const double ux = shape[p].x + expr * delta[p].x;
      const double uy = shape[p].y + expr * delta[p].y;
      lnd.frames[i][p] = {kFaceCenterX + face_dx + hx + face_scale * ux + lnoise.normal() * prof.landmark_noise_px * sigma,
                          kFaceCenterY + face_dy + hy + face_scale * uy + lnoise.normal() * prof.landmark_noise_px * sigma};
    }
  }

  StressTrace& st = out.stress;
  st.subject_id = sid;
  st.session_id = sess;
  st.sample_rate_hz = 1.0;
  st.values.resize(static_cast<std::size_t>(T));
  for (int s = 0; s < T; ++s) st.values[static_cast<std::size_t>(s)] = prof.stress_level[static_cast<std::size_t>(cls[s])];
  return out;
}

}  // namespace

ClassProfile ClassProfile::standard() { return ClassProfile{}; }

ClassProfile ClassProfile::scr_only() {
  ClassProfile p;
  p.name = "scr-only";
  p.class_weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  p.hr_mean = {76.0, 76.0, 76.0};
  p.temp_mean = {33.3, 33.3, 33.3};
  p.eda_level = {3.0, 3.0, 3.0};
  p.scr_rate_per_min = {0.5, 6.0, 6.0};
  p.scr_amplitude = 0.15;
  p.eda_drift_amplitude = 1.5;
  p.eda_drift_period_s = 150.0;
  return p;
}

ClassProfile ClassProfile::named(const std::string& name) {
  if (name == "standard" || name == "default") return standard();
  if (name == "scr-only") return scr_only();
  throw SpecError("unknown class profile '" + name + "'");
}

void SynthSpec::validate() const {
  if (n_subjects < 2) throw SpecError("n_subjects must be >= 2 for leave-one-subject-out evaluation");
  if (sessions_per_subject < 1) throw SpecError("sessions_per_subject must be >= 1");
  if (session_seconds < min_window_seconds) throw SpecError("session_seconds shorter than the window length");
  if (!(noise_sigma >= 0.0)) throw SpecError("noise_sigma must be >= 0");
  if (!(bio_rate_hz >= 1.0) || !(landmark_rate_hz >= 1.0)) throw SpecError("native rates must be >= 1 Hz");
  if (segment_seconds <= 0 || lead_in_seconds < 0) throw SpecError("segment lengths must be positive");
  const auto& w = profile.class_weights;
  if (w[0] < 0 || w[1] < 0 || w[2] < 0 || !(w[0] + w[1] + w[2] > 0)) throw SpecError("class weights must be non-negative with positive sum");
  for (double s : profile.stress_level) {
    if (s < kStressMin || s > kStressMax) throw SpecError("stress levels must lie in [0, 19]");
  }
  if (!(profile.scr_decay_s > 0.0) || !(profile.eda_drift_period_s > 0.0)) throw SpecError("time constants must be positive");
}

std::string subject_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "S%02d", index + 1);
  return buf;
}

std::vector<RawSession> synth_raw(const SynthSpec& spec) {
  spec.validate();
  std::vector<RawSession> out;
  out.reserve(static_cast<std::size_t>(spec.n_subjects * spec.sessions_per_subject));
  for (int s = 0; s < spec.n_subjects; ++s) {
    for (int q = 0; q < spec.sessions_per_subject; ++q) out.push_back(make_session(spec, s, q));
  }
  return out;
}

std::vector<AlignedSession> synth_dataset(const SynthSpec& spec) {
  std::vector<AlignedSession> out;
  for (const auto& raw : synth_raw(spec)) out.push_back(align(raw.recording, raw.landmarks, raw.stress));
  return out;
}

void to_json(nlohmann::json& j, const ClassProfile& p) {
  j = nlohmann::json{{"name", p.name},
                     {"class_weights", p.class_weights},
                     {"stress_level", p.stress_level},
                     {"hr_mean", p.hr_mean},
                     {"temp_mean", p.temp_mean},
                     {"acc_mean", p.acc_mean},
                     {"eda_level", p.eda_level},
                     {"scr_rate_per_min", p.scr_rate_per_min},
                     {"scr_amplitude", p.scr_amplitude},
                     {"scr_decay_s", p.scr_decay_s},
                     {"eda_drift_amplitude", p.eda_drift_amplitude},
                     {"eda_drift_period_s", p.eda_drift_period_s},
                     {"expression", p.expression},
                     {"hr_noise", p.hr_noise},
                     {"temp_noise", p.temp_noise},
                     {"acc_noise", p.acc_noise},
                     {"eda_noise", p.eda_noise},
                     {"landmark_noise_px", p.landmark_noise_px},
                     {"subject_hr_sd", p.subject_hr_sd},
                     {"subject_temp_sd", p.subject_temp_sd},
                     {"subject_eda_sd", p.subject_eda_sd},
                     {"subject_face_shift_px", p.subject_face_shift_px},
                     {"subject_face_scale_sd", p.subject_face_scale_sd},
                     {"subject_face_shape_sd", p.subject_face_shape_sd},
                     {"head_drift_px", p.head_drift_px}};
}

void from_json(const nlohmann::json& j, ClassProfile& p) {
  // A named profile is the base; explicit fields override it.
  p = ClassProfile::named(j.value("name", std::string("standard")));
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("class_weights", p.class_weights);
  get("stress_level", p.stress_level);
  get("hr_mean", p.hr_mean);
  get("temp_mean", p.temp_mean);
  get("acc_mean", p.acc_mean);
  get("eda_level", p.eda_level);
  get("scr_rate_per_min", p.scr_rate_per_min);
  get("scr_amplitude", p.scr_amplitude);
  get("scr_decay_s", p.scr_decay_s);
  get("eda_drift_amplitude", p.eda_drift_amplitude);
  get("eda_drift_period_s", p.eda_drift_period_s);
  get("expression", p.expression);
  get("hr_noise", p.hr_noise);
  get("temp_noise", p.temp_noise);
  get("acc_noise", p.acc_noise);
  get("eda_noise", p.eda_noise);
  get("landmark_noise_px", p.landmark_noise_px);
  get("subject_hr_sd", p.subject_hr_sd);
  get("subject_temp_sd", p.subject_temp_sd);
  get("subject_eda_sd", p.subject_eda_sd);
  get("subject_face_shift_px", p.subject_face_shift_px);
  get("subject_face_scale_sd", p.subject_face_scale_sd);
  get("subject_face_shape_sd", p.subject_face_shape_sd);
  get("head_drift_px", p.head_drift_px);
}

void to_json(nlohmann::json& j, const SynthSpec& s) {
  j = nlohmann::json{{"n_subjects", s.n_subjects},
                     {"session_seconds", s.session_seconds},
                     {"sessions_per_subject", s.sessions_per_subject},
                     {"profile", s.profile},
                     {"noise_sigma", s.noise_sigma},
                     {"seed", s.seed},
                     {"bio_rate_hz", s.bio_rate_hz},
                     {"landmark_rate_hz", s.landmark_rate_hz},
                     {"segment_seconds", s.segment_seconds},
                     {"lead_in_seconds", s.lead_in_seconds}};
}

void from_json(const nlohmann::json& j, SynthSpec& s) {
  s = SynthSpec{};
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("n_subjects", s.n_subjects);
  get("session_seconds", s.session_seconds);
  get("sessions_per_subject", s.sessions_per_subject);
  if (j.contains("profile")) {
    if (j.at("profile").is_string()) {
      s.profile = ClassProfile::named(j.at("profile").get<std::string>());
    } else {
      j.at("profile").get_to(s.profile);
    }
  }
  get("noise_sigma", s.noise_sigma);
  get("seed", s.seed);
  get("bio_rate_hz", s.bio_rate_hz);
  get("landmark_rate_hz", s.landmark_rate_hz);
  get("segment_seconds", s.segment_seconds);
  get("lead_in_seconds", s.lead_in_seconds);
}

}  // namespace stressfuse::sigcore

#include "stressfuse/sigcore/align.hpp"

#include <algorithm>

#include "stressfuse/common/error.hpp"
#include "stressfuse/sigcore/resample.hpp"

namespace stressfuse::sigcore {

AlignedSession align(const Recording& recording, const LandmarkTrack& landmarks, const StressTrace& stress) {
  if (recording.subject_id != landmarks.subject_id || recording.subject_id != stress.subject_id) {
    throw AlignmentError("subject id mismatch: " + recording.subject_id + " / " + landmarks.subject_id +
                         " / " + stress.subject_id);
  }
  if (recording.session_id != landmarks.session_id || recording.session_id != stress.session_id) {
    throw AlignmentError("session id mismatch for subject " + recording.subject_id);
  }
  recording.validate();
  landmarks.validate();
  stress.validate();
  if (recording.length() == 0 || landmarks.frames.empty() || stress.values.empty()) {
    throw AlignmentError("zero overlap: a stream is empty");
  }

  AlignedSession out;
  out.subject_id = recording.subject_id;
  out.session_id = recording.session_id;
  out.rate_hz = 1.0;
  for (const auto& [name, series] : recording.channels) {
    out.channels.emplace(name, resample_mean(series, recording.sample_rate_hz, 1.0));
  }
  out.landmarks = resample_frames(landmarks.frames, landmarks.sample_rate_hz, 1.0);
  out.stress = resample_mean(stress.values, stress.sample_rate_hz, 1.0);

  std::size_t n = std::min(out.landmarks.size(), out.stress.size());
  for (const auto& [name, series] : out.channels) n = std::min(n, series.size());
  if (n == 0) throw AlignmentError("zero overlap after resampling to 1 Hz");

  for (auto& [name, series] : out.channels) series.resize(n);
  out.landmarks.resize(n);
  out.stress.resize(n);
  return out;
}

AlignedSession align(const AlignedSession& session) {
  Recording rec{session.subject_id, session.session_id, 1.0, session.channels};
  LandmarkTrack lnd{session.subject_id, session.session_id, 1.0, session.landmarks};
  StressTrace st{session.subject_id, session.session_id, 1.0, session.stress};
  return align(rec, lnd, st);
}

}  // namespace stressfuse::sigcore

#include "stressfuse/sigcore/corpus.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "stressfuse/common/error.hpp"
#include "stressfuse/sigcore/align.hpp"
#include "stressfuse/sigcore/csv.hpp"

namespace fs = std::filesystem;

namespace stressfuse::sigcore {

void write_corpus(const fs::path& root, const std::vector<RawSession>& sessions,
                  const std::optional<SynthSpec>& spec) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
  nlohmann::json listing = nlohmann::json::array();
  for (const auto& s : sessions) {
    const fs::path dir = root / s.recording.subject_id / s.recording.session_id;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_recording(dir / "recording.csv", s.recording);
    write_landmarks(dir / "landmarks.csv", s.landmarks);
    write_stress(dir / "stress.csv", s.stress);
    listing.push_back({{"subject", s.recording.subject_id}, {"session", s.recording.session_id}});
  }
  nlohmann::json manifest{{"format", kCorpusFormat}, {"version", kCorpusVersion}, {"sessions", listing}};
  if (spec) manifest["synth"] = *spec;
  std::ofstream out(root / "manifest.json", std::ios::binary);
  if (!out) throw IoError("cannot write manifest in " + root.string());
  out << manifest.dump(2) << '\n';
}

std::vector<AlignedSession> load_corpus(const fs::path& root, const RecordingSchema& schema) {
  if (!fs::is_directory(root)) throw IoError("corpus directory not found: " + root.string());
  std::vector<std::pair<std::string, std::string>> ids;
  const fs::path manifest_path = root / "manifest.json";
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("corpus manifest: " + std::string(e.what()));
    }
    if (m.value("format", std::string()) != kCorpusFormat) throw FormatError("not a corpus manifest: " + manifest_path.string());
    for (const auto& e : m.at("sessions")) ids.emplace_back(e.at("subject").get<std::string>(), e.at("session").get<std::string>());
  } else {
    for (const auto& subj : fs::directory_iterator(root)) {
      if (!subj.is_directory()) continue;
      for (const auto& sess : fs::directory_iterator(subj.path())) {
        if (sess.is_directory() && fs::exists(sess.path() / "recording.csv")) {
          ids.emplace_back(subj.path().filename().string(), sess.path().filename().string());
        }
      }
    }
    std::sort(ids.begin(), ids.end());
  }
  if (ids.empty()) throw DataError("corpus " + root.string() + " contains no sessions");

  std::vector<AlignedSession> out;
  out.reserve(ids.size());
  for (const auto& [subject, session] : ids) {
    const fs::path dir = root / subject / session;
    for (const char* f : {"recording.csv", "landmarks.csv", "stress.csv"}) {
      if (!fs::exists(dir / f)) throw DependencyError("missing corpus file " + (dir / f).string());
    }
    out.push_back(align(load_recording(dir / "recording.csv", schema, subject, session),
                        load_landmarks(dir / "landmarks.csv", subject, session),
                        load_stress(dir / "stress.csv", subject, session)));
  }
  return out;
}

}  // namespace stressfuse::sigcore

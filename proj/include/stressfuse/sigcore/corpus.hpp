#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "stressfuse/sigcore/csv.hpp"
#include "stressfuse/sigcore/synth.hpp"
#include "stressfuse/sigcore/types.hpp"

namespace stressfuse::sigcore {

// On-disk layout:
//   <root>/manifest.json
//   <root>/<subject>/<session>/recording.csv   timestamp,HR,EDA,TEMP,ACC_X,ACC_Y,ACC_Z
//   <root>/<subject>/<session>/landmarks.csv   timestamp,x0..x67,y0..y67
//   <root>/<subject>/<session>/stress.csv      timestamp,stress
inline constexpr const char* kCorpusFormat = "stressfuse-corpus";
inline constexpr int kCorpusVersion = 1;

void write_corpus(const std::filesystem::path& root, const std::vector<RawSession>& sessions,
                  const std::optional<SynthSpec>& spec);

// Loads and aligns every session listed in the manifest (or, without a
// manifest, every <subject>/<session> directory holding the three files).
std::vector<AlignedSession> load_corpus(const std::filesystem::path& root,
                                        const RecordingSchema& schema = RecordingSchema::standard());

}  // namespace stressfuse::sigcore

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stressfuse/common/matrix.hpp"
#include "stressfuse/edaproc/eda.hpp"
#include "stressfuse/featex/manifest.hpp"
#include "stressfuse/featex/stats.hpp"
#include "stressfuse/featex/windows.hpp"
#include "stressfuse/sigcore/types.hpp"

namespace stressfuse::featex {

struct FeatureMatrix {
  std::vector<std::string> feature_names;
  Matrix values;  // windows x features
  std::vector<int> labels;
  std::vector<std::string> subject_ids;
  std::size_t dropped_windows = 0;  // not serialized

  std::size_t rows() const { return values.rows; }
  std::size_t cols() const { return values.cols; }

  FeatureMatrix select_rows(std::span<const std::size_t> idx) const;
  FeatureMatrix select_cols(std::span<const std::size_t> idx) const;
  std::vector<Modality> modalities() const;
  // Indices of columns of the given modality, in column order.
  std::vector<std::size_t> columns_of(Modality m) const;
  // Sorted unique subject ids.
  std::vector<std::string> subjects() const;

  void validate() const;

  bool operator==(const FeatureMatrix& o) const {
    return feature_names == o.feature_names && values == o.values && labels == o.labels &&
           subject_ids == o.subject_ids;
  }
};

struct BuildOptions {
  WindowSpec window;
  StatParams stats;
  edaproc::EdaConfig eda;
  bool normalize = true;   // per-subject z-score
  bool parallel = true;    // false selects the serial kernel
};

FeatureMatrix build_matrix(std::span<const sigcore::AlignedSession> sessions, const FeatureManifest& manifest,
                           const BuildOptions& options = {});

// Per subject, each column becomes (x - mean) / population std; columns that
// are constant within a subject become 0.
void zscore_per_subject(FeatureMatrix& m);

// CSV with header subject_id,label,<feature names>.
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

}  // namespace stressfuse::featex

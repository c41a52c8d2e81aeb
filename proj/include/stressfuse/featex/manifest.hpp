#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace stressfuse::featex {

enum class Modality { kBio, kLandmark };

enum class SourceKind {
  kSeries,    // statistic over a biometric series
  kScr,       // SCR event aggregate
  kLandmark,  // statistic over one landmark coordinate (X0..X67, Y0..Y67)
  kGeometry,  // statistic over a derived geometry scalar (G_<name>)
};

struct FeatureColumn {
  std::string name;
  SourceKind kind = SourceKind::kSeries;
  std::string source;     // series name, e.g. "EDA_Tonic", "X12", "G_mouth_aspect"; SCR aggregate name
  std::string statistic;  // short stat name; empty for SCR aggregates

  bool operator==(const FeatureColumn&) const = default;
};

// Biometric series in bio-paper column order.
inline constexpr std::string_view kBioSeries[] = {"HR",      "TEMP",   "ACC_X",     "ACC_Y",     "ACC_Z",     "ACC_MAG",
                                                  "HR_Diff", "EDA",    "EDA_Clean", "EDA_Tonic", "EDA_Phasic"};

// The six per-window aggregates followed by four summary extensions.
inline constexpr std::string_view kScrColumns[] = {
    "SCR_Onsets",    "SCR_Peaks",        "SCR_Height",       "SCR_Amplitude", "SCR_RiseTime",
    "SCR_RecTime",   "SCR_MaxHeight",    "SCR_MaxAmplitude", "SCR_SumAmplitude", "SCR_Recovered"};

inline constexpr std::string_view kPresetNames[] = {"bio-paper", "lnd-paper", "fused-paper", "lnd-geometry",
                                                    "fused-geometry"};

struct FeatureManifest {
  std::string preset;
  std::vector<FeatureColumn> columns;

  // bio-paper 175, lnd-paper 1904, fused-paper 2079, lnd-geometry 2354,
  // fused-geometry 2529 columns.
  static FeatureManifest from_preset(std::string_view name);

  // Drops EDA_Tonic, EDA_Phasic and every SCR aggregate.
  FeatureManifest without_eda_components() const;

  std::size_t size() const { return columns.size(); }
  std::vector<std::string> names() const;
  void validate() const;

  nlohmann::json to_json() const;
  static FeatureManifest from_json(const nlohmann::json& j);
};

Modality column_modality(std::string_view feature_name);
std::string_view modality_name(Modality m);

}  // namespace stressfuse::featex

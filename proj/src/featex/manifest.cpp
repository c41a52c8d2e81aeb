#include "stressfuse/featex/manifest.hpp"

#include <cctype>
#include <unordered_set>

#include "stressfuse/common/error.hpp"
#include "stressfuse/featex/landmarks.hpp"
#include "stressfuse/featex/stats.hpp"
#include "stressfuse/sigcore/types.hpp"

namespace stressfuse::featex {
namespace {

constexpr std::string_view kVariation = "variation";

std::string column_name(std::string_view stat, std::string_view source) {
  return std::string(stat) + "_" + std::string(source);
}

void add_bio(std::vector<FeatureColumn>& cols) {
  for (auto series : kBioSeries)
    for (auto stat : kStatNames)
      cols.push_back({column_name(stat, series), SourceKind::kSeries, std::string(series), std::string(stat)});
  for (auto scr : kScrColumns) cols.push_back({std::string(scr), SourceKind::kScr, std::string(scr), ""});
}

// The variation coefficient is left out: on pixel coordinates it depends on
// where the origin sits rather than on the face.
void add_landmarks(std::vector<FeatureColumn>& cols) {
  for (char axis : {'X', 'Y'}) {
    for (std::size_t i = 0; i < sigcore::kLandmarkCount; ++i) {
      const std::string source = std::string(1, axis) + std::to_string(i);
      for (auto stat : kStatNames) {
        if (stat == kVariation) continue;
        cols.push_back({column_name(stat, source), SourceKind::kLandmark, source, std::string(stat)});
      }
    }
  }
}

void add_geometry(std::vector<FeatureColumn>& cols) {
  for (auto g : kGeometryNames) {
    const std::string source = "G_" + std::string(g);
    for (auto stat : kStatNames)
      cols.push_back({column_name(stat, source), SourceKind::kGeometry, source, std::string(stat)});
  }
}

std::string_view kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::kSeries: return "series";
    case SourceKind::kScr: return "scr";
    case SourceKind::kLandmark: return "landmark";
    case SourceKind::kGeometry: return "geometry";
  }
  return "series";
}

SourceKind kind_from_name(std::string_view s) {
  if (s == "series") return SourceKind::kSeries;
  if (s == "scr") return SourceKind::kScr;
  if (s == "landmark") return SourceKind::kLandmark;
  if (s == "geometry") return SourceKind::kGeometry;
  throw SchemaError("unknown manifest column kind: " + std::string(s));
}

}  // namespace

FeatureManifest FeatureManifest::from_preset(std::string_view name) {
  FeatureManifest m;
  m.preset = std::string(name);
  if (name == "bio-paper") {
    add_bio(m.columns);
  } else if (name == "lnd-paper") {
    add_landmarks(m.columns);
  } else if (name == "fused-paper") {
    add_bio(m.columns);
    add_landmarks(m.columns);
  } else if (name == "lnd-geometry") {
    add_landmarks(m.columns);
    add_geometry(m.columns);
  } else if (name == "fused-geometry") {
    add_bio(m.columns);
    add_landmarks(m.columns);
    add_geometry(m.columns);
  } else {
    throw SpecError("unknown manifest preset: " + std::string(name));
  }
  return m;
}

FeatureManifest FeatureManifest::without_eda_components() const {
  FeatureManifest out;
  out.preset = preset + "-no-eda-components";
  for (const auto& c : columns) {
    if (c.kind == SourceKind::kScr) continue;
    if (c.kind == SourceKind::kSeries && (c.source == "EDA_Tonic" || c.source == "EDA_Phasic")) continue;
    out.columns.push_back(c);
  }
  return out;
}

std::vector<std::string> FeatureManifest::names() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

void FeatureManifest::validate() const {
  if (columns.empty()) throw SpecError("manifest has no columns");
  std::unordered_set<std::string> seen;
  for (const auto& c : columns) {
    if (!seen.insert(c.name).second) throw SpecError("duplicate manifest column: " + c.name);
    if (c.kind == SourceKind::kScr) continue;
    bool known = false;
    for (auto s : kStatNames) known = known || s == c.statistic;
    if (!known) throw SpecError("unknown statistic in column " + c.name);
  }
}

nlohmann::json FeatureManifest::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : columns) {
    nlohmann::json o = {{"name", c.name},
                        {"kind", kind_name(c.kind)},
                        {"source", c.source},
                        {"modality", modality_name(column_modality(c.name))}};
    if (!c.statistic.empty()) o["statistic"] = c.statistic;
    arr.push_back(std::move(o));
  }
  return arr;
}

FeatureManifest FeatureManifest::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw SchemaError("manifest JSON must be a list of column descriptors");
  FeatureManifest m;
  m.preset = "custom";
  for (const auto& o : j) {
    FeatureColumn c;
    c.name = o.at("name").get<std::string>();
    c.kind = kind_from_name(o.at("kind").get<std::string>());
    c.source = o.at("source").get<std::string>();
    c.statistic = o.value("statistic", std::string());
    m.columns.push_back(std::move(c));
  }
  m.validate();
  return m;
}

Modality column_modality(std::string_view name) {
  if (name.find("_G_") != std::string_view::npos) return Modality::kLandmark;
  // Landmark coordinates end in _X<digits> or _Y<digits>.
  std::size_t i = name.size();
  while (i > 0 && std::isdigit(static_cast<unsigned char>(name[i - 1]))) --i;
  if (i < name.size() && i >= 2 && (name[i - 1] == 'X' || name[i - 1] == 'Y') && name[i - 2] == '_')
    return Modality::kLandmark;
  return Modality::kBio;
}

std::string_view modality_name(Modality m) { return m == Modality::kBio ? "bio" : "lnd"; }

}  // namespace stressfuse::featex

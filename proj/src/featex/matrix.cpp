#include "stressfuse/featex/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "stressfuse/common/error.hpp"
#include "stressfuse/common/log.hpp"
#include "stressfuse/featex/landmarks.hpp"
#include "stressfuse/kernels/window_stats.hpp"
#include "stressfuse/sigcore/csv.hpp"

namespace stressfuse::featex {
namespace {

using sigcore::Series;

std::size_t stat_index(std::string_view name) {
  for (std::size_t k = 0; k < kStatCount; ++k)
    if (kStatNames[k] == name) return k;
  throw SpecError("unknown statistic: " + std::string(name));
}

std::size_t scr_index(std::string_view name) {
  for (std::size_t k = 0; k < std::size(kScrColumns); ++k)
    if (kScrColumns[k] == name) return k;
  throw SpecError("unknown SCR aggregate: " + std::string(name));
}

const Series& channel(const sigcore::AlignedSession& s, const std::string& name) {
  auto it = s.channels.find(name);
  if (it == s.channels.end())
    throw SchemaError("session " + s.subject_id + "/" + s.session_id + " lacks channel " + name);
  return it->second;
}

struct EdaProducts {
  Series clean, tonic, phasic;
  std::vector<edaproc::ScrEvent> events;
};

EdaProducts process_eda(const Series& eda, const edaproc::EdaConfig& cfg) {
  EdaProducts p;
  p.clean = edaproc::clean_eda(eda, 1.0, cfg);
  Series bridged = p.clean;
  if (!edaproc::bridge_nans(bridged)) {
    p.tonic = p.phasic = p.clean;
    return p;
  }
  auto d = edaproc::decompose(bridged, 1.0, cfg);
  p.events = edaproc::detect_scr(d.phasic, 1.0, cfg.min_amplitude);
  p.tonic = std::move(d.tonic);
  p.phasic = std::move(d.phasic);
  for (std::size_t i = 0; i < eda.size(); ++i) {
    if (std::isnan(eda[i])) p.tonic[i] = p.phasic[i] = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

std::array<double, std::size(kScrColumns)> scr_columns(std::span<const edaproc::ScrEvent> events, const Window& w) {
  std::array<double, std::size(kScrColumns)> out{};
  const auto core = edaproc::scr_window_aggregates(events, w.start, w.end - w.start, 1.0);
  std::copy(core.begin(), core.end(), out.begin());
  double max_h = 0.0, max_a = 0.0, sum_a = 0.0, recovered = 0.0;
  bool any = false;
  for (const auto& e : events) {
    if (e.peak_idx < w.start || e.peak_idx >= w.end) continue;
    max_h = any ? std::max(max_h, e.height) : e.height;
    max_a = any ? std::max(max_a, e.amplitude) : e.amplitude;
    any = true;
    sum_a += e.amplitude;
    if (e.recovery_idx) recovered += 1.0;
  }
  out[6] = max_h;
  out[7] = max_a;
  out[8] = sum_a;
  out[9] = recovered;
  return out;
}

bool window_has_nan(const Series& s, const Window& w) {
  for (std::size_t i = w.start; i < w.end; ++i)
    if (!std::isfinite(s[i])) return true;
  return false;
}

// Resolves every source series a manifest needs for one session.
class SessionSources {
 public:
  SessionSources(const sigcore::AlignedSession& s, const edaproc::EdaConfig& eda_cfg) : s_(s), eda_cfg_(eda_cfg) {}

  const Series& get(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(name, compute(name)).first->second;
  }

  const EdaProducts& eda() {
    if (!eda_) eda_ = process_eda(channel(s_, "EDA"), eda_cfg_);
    return *eda_;
  }

 private:
  Series compute(const std::string& name) {
    const std::size_t n = s_.length();
    if (name == "ACC_MAG") {
      const auto &x = channel(s_, "ACC_X"), &y = channel(s_, "ACC_Y"), &z = channel(s_, "ACC_Z");
      Series out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
      return out;
    }
    if (name == "HR_Diff") {
      const auto& hr = channel(s_, "HR");
      Series out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = i == 0 ? hr[0] - hr[0] : hr[i] - hr[i - 1];
      return out;
    }
    if (name == "EDA_Clean") return eda().clean;
    if (name == "EDA_Tonic") return eda().tonic;
    if (name == "EDA_Phasic") return eda().phasic;
    if ((name[0] == 'X' || name[0] == 'Y') && name.size() > 1 &&
        std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      const std::size_t idx = std::stoul(name.substr(1));
      if (idx >= sigcore::kLandmarkCount) throw SpecError("landmark index out of range: " + name);
      if (s_.landmarks.size() != n) throw SchemaError("session " + s_.subject_id + " has no landmark track");
      Series out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = name[0] == 'X' ? s_.landmarks[i][idx].x : s_.landmarks[i][idx].y;
      return out;
    }
    if (name.rfind("G_", 0) == 0) {
      const auto& all = geometry();
      for (std::size_t g = 0; g < kGeometryCount; ++g)
        if (name.substr(2) == kGeometryNames[g]) return all[g];
      throw SpecError("unknown geometry feature: " + name);
    }
    return channel(s_, name);
  }

  const std::vector<Series>& geometry() {
    if (geometry_) return *geometry_;
    const std::size_t n = s_.length();
    if (s_.landmarks.size() != n) throw SchemaError("session " + s_.subject_id + " has no landmark track");
    std::vector<Series> out(kGeometryCount, Series(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& f = s_.landmarks[i];
      bool finite = true;
      for (const auto& p : f) finite = finite && std::isfinite(p.x) && std::isfinite(p.y);
      if (!finite) {
        for (auto& g : out) g[i] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const auto v = landmark_derived(f);
      for (std::size_t g = 0; g < kGeometryCount; ++g) out[g][i] = v[g];
    }
    geometry_ = std::move(out);
    return *geometry_;
  }

  const sigcore::AlignedSession& s_;
  edaproc::EdaConfig eda_cfg_;
  std::unordered_map<std::string, Series> cache_;
  std::optional<EdaProducts> eda_;
  std::optional<std::vector<Series>> geometry_;
};

struct ColumnPlan {
  std::vector<std::string> sources;  // distinct stat sources in first-use order
  struct Ref {
    bool scr = false;
    std::size_t source = 0;  // index into sources, or SCR aggregate index
    std::size_t stat = 0;
  };
  std::vector<Ref> refs;
  bool needs_scr = false;
};

ColumnPlan plan_columns(const FeatureManifest& manifest) {
  ColumnPlan plan;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& c : manifest.columns) {
    ColumnPlan::Ref r;
    if (c.kind == SourceKind::kScr) {
      r.scr = true;
      r.source = scr_index(c.source);
      plan.needs_scr = true;
    } else {
      auto [it, fresh] = index.emplace(c.source, plan.sources.size());
      if (fresh) plan.sources.push_back(c.source);
      r.source = it->second;
      r.stat = stat_index(c.statistic);
    }
    plan.refs.push_back(r);
  }
  return plan;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> idx) const {
  FeatureMatrix out;
  out.feature_names = feature_names;
  out.values = values.select_rows(idx);
  for (auto i : idx) {
    out.labels.push_back(labels.at(i));
    out.subject_ids.push_back(subject_ids.at(i));
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_cols(std::span<const std::size_t> idx) const {
  FeatureMatrix out;
  for (auto c : idx) out.feature_names.push_back(feature_names.at(c));
  out.values = values.select_cols(idx);
  out.labels = labels;
  out.subject_ids = subject_ids;
  out.dropped_windows = dropped_windows;
  return out;
}

std::vector<Modality> FeatureMatrix::modalities() const {
  std::vector<Modality> out;
  out.reserve(feature_names.size());
  for (const auto& n : feature_names) out.push_back(column_modality(n));
  return out;
}

std::vector<std::size_t> FeatureMatrix::columns_of(Modality m) const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < feature_names.size(); ++c)
    if (column_modality(feature_names[c]) == m) out.push_back(c);
  return out;
}

std::vector<std::string> FeatureMatrix::subjects() const {
  std::set<std::string> s(subject_ids.begin(), subject_ids.end());
  return {s.begin(), s.end()};
}

void FeatureMatrix::validate() const {
  if (values.cols != feature_names.size()) throw ShapeError("feature name count does not match column count");
  if (labels.size() != values.rows || subject_ids.size() != values.rows)
    throw ShapeError("labels/subject ids do not match row count");
  for (int l : labels)
    if (l < 0 || l > 2) throw LabelError("label outside {0,1,2}");
  for (double v : values.data)
    if (!std::isfinite(v)) throw NumericError("feature matrix holds a non-finite cell");
}

FeatureMatrix build_matrix(std::span<const sigcore::AlignedSession> sessions, const FeatureManifest& manifest,
                           const BuildOptions& options) {
  if (sessions.empty()) throw SpecError("build_matrix needs at least one session");
  manifest.validate();
  options.window.validate();
  const ColumnPlan plan = plan_columns(manifest);

  FeatureMatrix out;
  out.feature_names = manifest.names();
  std::vector<double> data;

  for (const auto& session : sessions) {
    const auto wins = windows(session.length(), options.window);
    if (wins.empty()) continue;
    SessionSources src(session, options.eda);

    std::vector<const Series*> series;
    for (const auto& name : plan.sources) series.push_back(&src.get(name));
    const Series* eda_raw = plan.needs_scr ? &channel(session, "EDA") : nullptr;

    std::vector<Window> kept;
    std::vector<int> labels;
    for (const auto& w : wins) {
      bool drop = window_has_nan(session.stress, w);
      for (const auto* s : series) drop = drop || window_has_nan(*s, w);
      if (eda_raw) drop = drop || window_has_nan(*eda_raw, w);
      if (drop) {
        ++out.dropped_windows;
        continue;
      }
      kept.push_back(w);
      labels.push_back(bin_label(std::span(session.stress).subspan(w.start, w.end - w.start)));
    }
    if (kept.empty()) continue;

    std::vector<std::span<const double>> views;
    for (const auto* s : series) views.emplace_back(*s);
    const Matrix stats = options.parallel ? kernels::window_stats(views, kept, options.stats)
                                          : kernels::window_stats_serial(views, kept, options.stats);
    for (std::size_t w = 0; w < kept.size(); ++w) {
      std::optional<std::array<double, std::size(kScrColumns)>> scr;
      if (plan.needs_scr) scr = scr_columns(src.eda().events, kept[w]);
      for (const auto& r : plan.refs)
        data.push_back(r.scr ? (*scr)[r.source] : stats(w, r.source * kStatCount + r.stat));
      out.labels.push_back(labels[w]);
      out.subject_ids.push_back(session.subject_id);
    }
  }

  if (out.labels.empty()) throw EmptyMatrixError("every window was dropped; the feature matrix is empty");
  out.values.rows = out.labels.size();
  out.values.cols = out.feature_names.size();
  out.values.data = std::move(data);
  if (options.normalize) zscore_per_subject(out);
  return out;
}

void zscore_per_subject(FeatureMatrix& m) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < m.rows(); ++r) groups[m.subject_ids[r]].push_back(r);
  for (const auto& [subject, rows] : groups) {
    const double n = static_cast<double>(rows.size());
    for (std::size_t c = 0; c < m.cols(); ++c) {
      double sum = 0.0;
      for (auto r : rows) sum += m.values(r, c);
      const double mean = sum / n;
      double ss = 0.0;
      for (auto r : rows) {
        const double d = m.values(r, c) - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / n);
      // Treat rounding-level spread as constant.
      const bool constant = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
      for (auto r : rows) m.values(r, c) = constant ? 0.0 : (m.values(r, c) - mean) / sd;
    }
  }
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
  m.validate();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "subject_id,label";
  for (const auto& n : m.feature_names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (m.subject_ids[r].find(',') != std::string::npos) throw FormatError("subject id contains a comma");
    out << m.subject_ids[r] << ',' << m.labels[r];
    for (double v : m.values.row(r)) out << ',' << sigcore::format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + " is empty");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "subject_id" || header[1] != "label")
    throw FormatError(path.string() + ": header must start with subject_id,label and name at least one feature");
  FeatureMatrix m;
  m.feature_names.assign(header.begin() + 2, header.end());
  std::vector<double> data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                        " fields");
    m.subject_ids.push_back(f[0]);
    const double label = sigcore::parse_double(f[1]);
    if (label != 0.0 && label != 1.0 && label != 2.0)
      throw LabelError(path.string() + ":" + std::to_string(lineno) + ": label outside {0,1,2}");
    m.labels.push_back(static_cast<int>(label));
    for (std::size_t c = 2; c < f.size(); ++c) data.push_back(sigcore::parse_double(f[c]));
  }
  m.values.rows = m.labels.size();
  m.values.cols = m.feature_names.size();
  m.values.data = std::move(data);
  if (m.rows() == 0) throw EmptyMatrixError(path.string() + " holds no rows");
  m.validate();
  return m;
}

}  // namespace stressfuse::featex

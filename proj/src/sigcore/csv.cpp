#include "stressfuse/sigcore/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "stressfuse/common/error.hpp"

namespace stressfuse::sigcore {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

double infer_rate(const std::vector<double>& ts, const std::filesystem::path& path) {
  if (ts.size() < 2) throw FormatError(path.string() + ": need at least two rows to infer a sample rate");
  std::vector<double> deltas(ts.size() - 1);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (!(ts[i] > ts[i - 1])) throw FormatError(path.string() + ": timestamps not strictly increasing");
    deltas[i - 1] = ts[i] - ts[i - 1];
  }
  const auto mid = deltas.begin() + static_cast<long>(deltas.size() / 2);
  std::nth_element(deltas.begin(), mid, deltas.end());
  double median = *mid;
  if (deltas.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(deltas.begin(), mid));
  }
  return 1.0 / median;
}

const std::vector<double>& timestamps(const CsvTable& t, const std::filesystem::path& path) {
  const long idx = t.find("timestamp");
  if (idx < 0) throw SchemaError(path.string() + ": missing timestamp column");
  return t.columns[static_cast<std::size_t>(idx)];
}

std::vector<double> timeline(std::size_t n, double rate) {
  std::vector<double> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = static_cast<double>(i) / rate;
  return ts;
}

}  // namespace

long CsvTable::find(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<long>(i);
  }
  return -1;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  if (token == "nan" || token == "NaN" || token == "NAN" || token.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double v = 0.0;
  const char* first = token.data();
  if (*first == '+') ++first;
  auto res = std::from_chars(first, token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw FormatError("not a number: '" + std::string(token) + "'");
  }
  return v;
}

CsvTable read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw FormatError(path.string() + ": empty file");
  for (auto tok : split_commas(line)) table.header.emplace_back(tok);
  {
    std::vector<std::string> sorted = table.header;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw SchemaError(path.string() + ": duplicate column name");
    }
  }
  table.columns.resize(table.header.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto toks = split_commas(line);
    if (toks.size() != table.header.size()) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": wrong field count");
    }
    for (std::size_t c = 0; c < toks.size(); ++c) {
      try {
        table.columns[c].push_back(parse_double(toks[c]));
      } catch (const FormatError& e) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  if (table.rows() == 0) throw FormatError(path.string() + ": no data rows");
  return table;
}

void write_numeric_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                       const std::vector<const std::vector<double>*>& columns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  const std::size_t n = columns.empty() ? 0 : columns.front()->size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << (c ? "," : "") << format_double((*columns[c])[r]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

RecordingSchema RecordingSchema::standard() {
  RecordingSchema s;
  for (auto name : kChannelNames) s.channel_columns.emplace(std::string(name), std::string(name));
  return s;
}

Recording load_recording(const std::filesystem::path& path, const RecordingSchema& schema,
                         std::string subject_id, std::string session_id) {
  const CsvTable t = read_numeric_csv(path);
  Recording rec;
  rec.subject_id = std::move(subject_id);
  rec.session_id = std::move(session_id);
  rec.sample_rate_hz = infer_rate(timestamps(t, path), path);
  for (const auto& [channel, column] : schema.channel_columns) {
    if (!is_known_channel(channel)) throw SchemaError("unknown channel name " + channel);
    const long idx = t.find(column);
    if (idx < 0) throw SchemaError(path.string() + ": missing column " + column + " for channel " + channel);
    rec.channels.emplace(channel, t.columns[static_cast<std::size_t>(idx)]);
  }
  rec.validate();
  return rec;
}

LandmarkTrack load_landmarks(const std::filesystem::path& path, std::string subject_id,
                             std::string session_id) {
  const CsvTable t = read_numeric_csv(path);
  LandmarkTrack track;
  track.subject_id = std::move(subject_id);
  track.session_id = std::move(session_id);
  track.sample_rate_hz = infer_rate(timestamps(t, path), path);
  std::array<std::size_t, kLandmarkCount> xs{}, ys{};
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const long xi = t.find("x" + std::to_string(i));
    const long yi = t.find("y" + std::to_string(i));
    if (xi < 0 || yi < 0) throw SchemaError(path.string() + ": missing landmark column for point " + std::to_string(i));
    xs[i] = static_cast<std::size_t>(xi);
    ys[i] = static_cast<std::size_t>(yi);
  }
  track.frames.resize(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      track.frames[r][i] = {t.columns[xs[i]][r], t.columns[ys[i]][r]};
    }
  }
  track.validate();
  return track;
}

StressTrace load_stress(const std::filesystem::path& path, std::string subject_id, std::string session_id) {
  const CsvTable t = read_numeric_csv(path);
  StressTrace trace;
  trace.subject_id = std::move(subject_id);
  trace.session_id = std::move(session_id);
  trace.sample_rate_hz = infer_rate(timestamps(t, path), path);
  const long idx = t.find("stress");
  if (idx < 0) throw SchemaError(path.string() + ": missing stress column");
  trace.values = t.columns[static_cast<std::size_t>(idx)];
  trace.validate();
  return trace;
}

void write_recording(const std::filesystem::path& path, const Recording& rec) {
  const auto ts = timeline(rec.length(), rec.sample_rate_hz);
  std::vector<std::string> header{"timestamp"};
  std::vector<const std::vector<double>*> cols{&ts};
  // Canonical channel order, not map order, so files read naturally.
  for (auto name : kChannelNames) {
    auto it = rec.channels.find(std::string(name));
    if (it == rec.channels.end()) continue;
    header.emplace_back(name);
    cols.push_back(&it->second);
  }
  write_numeric_csv(path, header, cols);
}

void write_landmarks(const std::filesystem::path& path, const LandmarkTrack& track) {
  const std::size_t n = track.frames.size();
  const auto ts = timeline(n, track.sample_rate_hz);
  std::vector<std::vector<double>> data(2 * kLandmarkCount, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      data[i][r] = track.frames[r][i].x;
      data[kLandmarkCount + i][r] = track.frames[r][i].y;
    }
  }
  std::vector<std::string> header{"timestamp"};
  std::vector<const std::vector<double>*> cols{&ts};
  for (std::size_t i = 0; i < kLandmarkCount; ++i) header.push_back("x" + std::to_string(i));
  for (std::size_t i = 0; i < kLandmarkCount; ++i) header.push_back("y" + std::to_string(i));
  for (const auto& d : data) cols.push_back(&d);
  write_numeric_csv(path, header, cols);
}

void write_stress(const std::filesystem::path& path, const StressTrace& trace) {
  const auto ts = timeline(trace.values.size(), trace.sample_rate_hz);
  write_numeric_csv(path, {"timestamp", "stress"}, {&ts, &trace.values});
}

}  // namespace stressfuse::sigcore

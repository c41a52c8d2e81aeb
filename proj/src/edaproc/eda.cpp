#include "stressfuse/edaproc/eda.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "stressfuse/common/error.hpp"
#include "stressfuse/edaproc/filter.hpp"
#include "stressfuse/sigcore/csv.hpp"

namespace stressfuse::edaproc {
bool bridge_nans(std::vector<double>& x) {
  const std::size_t n = x.size();
  std::size_t first = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isnan(x[i])) {
      first = i;
      break;
    }
  }
  if (first == n) return false;
  for (std::size_t i = 0; i < first; ++i) x[i] = x[first];
  std::size_t last = first;
  for (std::size_t i = first + 1; i < n; ++i) {
    if (std::isnan(x[i])) continue;
    if (i > last + 1) {
      const double a = x[last], b = x[i];
      const double span = static_cast<double>(i - last);
      for (std::size_t k = last + 1; k < i; ++k) x[k] = a + (b - a) * static_cast<double>(k - last) / span;
    }
    last = i;
  }
  for (std::size_t i = last + 1; i < n; ++i) x[i] = x[last];
  return true;
}

namespace {

std::vector<double> moving_median(std::span<const double> x, std::size_t window) {
  const std::size_t n = x.size();
  const std::size_t half = window / 2;
  std::vector<double> out(n);
  std::vector<double> buf;
  buf.reserve(window);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    buf.assign(x.begin() + static_cast<long>(lo), x.begin() + static_cast<long>(hi));
    const std::size_t m = buf.size();
    auto mid = buf.begin() + static_cast<long>(m / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    double med = *mid;
    if (m % 2 == 0) med = 0.5 * (med + *std::max_element(buf.begin(), mid));
    out[i] = med;
  }
  return out;
}

// Power-of-two spacing on which every value up to max_abs in magnitude, and
// every difference of two such values, is exactly representable.
double exact_grid(double max_abs) {
  int e = 0;
  std::frexp(std::max(max_abs, std::numeric_limits<double>::min()), &e);
  return std::ldexp(1.0, e + 1 - std::numeric_limits<double>::digits);
}

// phasic = clean - tonic. Where rounding breaks tonic + phasic == clean
// (typically clean near zero beside a larger tonic level) both values snap to
// the grid, which moves them by at most half a grid step.
void split_exact(double& clean, double& tonic, double& phasic, double grid) {
  phasic = clean - tonic;
  if (tonic + phasic == clean) return;
  clean = std::nearbyint(clean / grid) * grid;
  tonic = std::nearbyint(tonic / grid) * grid;
  phasic = clean - tonic;
  if (tonic + phasic != clean) throw InternalError("cannot represent tonic/phasic split exactly");
}

}  // namespace

std::vector<double> clean_eda(std::span<const double> raw, double fs, const EdaConfig& cfg) {
  if (!(fs > 0.0)) throw SpecError("sample rate must be positive");
  if (raw.size() < kMinEdaSamples) throw LengthError("EDA series shorter than the filter warm-up (5 samples)");
  std::vector<double> x(raw.begin(), raw.end());
  if (!bridge_nans(x)) return x;
  std::vector<double> y = cfg.clean_cutoff_hz >= 0.5 * fs ? x : filtfilt(butterworth_lowpass(cfg.clean_cutoff_hz, fs), x);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (std::isnan(raw[i])) y[i] = raw[i];
  }
  return y;
}

EdaDecomposition decompose(std::span<const double> clean, double fs, const EdaConfig& cfg) {
  if (!(fs > 0.0)) throw SpecError("sample rate must be positive");
  const double min_len = std::ceil(cfg.median_window_s * fs);
  if (static_cast<double>(clean.size()) < min_len || clean.size() < kMinEdaSamples) {
    throw LengthError("EDA series shorter than the median window");
  }
  for (double v : clean) {
    if (!std::isfinite(v)) throw NumericError("decompose requires a finite clean series");
  }
  auto window = static_cast<std::size_t>(std::llround(cfg.median_window_s * fs));
  if (window % 2 == 0) ++window;
  std::vector<double> tonic = moving_median(clean, window);
  if (cfg.tonic_cutoff_hz < 0.5 * fs) tonic = filtfilt(butterworth_lowpass(cfg.tonic_cutoff_hz, fs), tonic);

  EdaDecomposition d;
  d.clean.assign(clean.begin(), clean.end());
  d.phasic.resize(clean.size());
  double max_abs = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) max_abs = std::max({max_abs, std::abs(clean[i]), std::abs(tonic[i])});
  const double grid = exact_grid(max_abs);
  for (std::size_t i = 0; i < clean.size(); ++i) split_exact(d.clean[i], tonic[i], d.phasic[i], grid);
  d.tonic = std::move(tonic);
  return d;
}

std::vector<ScrEvent> detect_scr(std::span<const double> x, double fs, double min_amplitude) {
  if (!(fs > 0.0)) throw SpecError("sample rate must be positive");
  if (!(min_amplitude > 0.0)) throw SpecError("min_amplitude must be positive");
  const std::size_t n = x.size();
  std::vector<ScrEvent> events;
  std::size_t search_from = 0;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(x[i] > x[i - 1])) {
      ++i;
      continue;
    }
    // Walk a plateau; it is a peak only if the signal falls after it.
    std::size_t j = i;
    while (j + 1 < n && x[j + 1] == x[i]) ++j;
    if (j + 1 >= n || !(x[j + 1] < x[i])) {
      i = j + 1;
      continue;
    }
    // Onset: lowest point since the previous accepted peak, latest on ties.
    std::size_t onset = search_from;
    for (std::size_t k = search_from; k < i; ++k) {
      if (x[k] <= x[onset]) onset = k;
    }
    const double amp = x[i] - x[onset];
    if (amp >= min_amplitude) {
      ScrEvent e;
      e.onset_idx = onset;
      e.peak_idx = i;
      e.height = x[i];
      e.amplitude = amp;
      e.rise_time_s = static_cast<double>(i - onset) / fs;
      events.push_back(e);
      search_from = i;
    }
    i = j + 1;
  }

  for (std::size_t e = 0; e < events.size(); ++e) {
    auto& ev = events[e];
    const std::size_t limit = e + 1 < events.size() ? events[e + 1].onset_idx : n - 1;
    const double target = ev.height - 0.5 * ev.amplitude;
    for (std::size_t k = ev.peak_idx + 1; k <= limit && k < n; ++k) {
      if (x[k] <= target) {
        ev.recovery_idx = k;
        ev.recovery_time_s = static_cast<double>(k - ev.peak_idx) / fs;
        break;
      }
    }
  }
  return events;
}

std::array<double, kScrAggregateCount> scr_window_aggregates(std::span<const ScrEvent> events,
                                                             std::size_t window_start, std::size_t window_len,
                                                             double fs) {
  (void)fs;  // times are already stored in seconds
  std::array<double, kScrAggregateCount> out{};
  double count = 0, recovered = 0;
  double height = 0, amp = 0, rise = 0, rec = 0;
  for (const auto& e : events) {
    if (e.peak_idx < window_start || e.peak_idx >= window_start + window_len) continue;
    count += 1;
    height += e.height;
    amp += e.amplitude;
    rise += e.rise_time_s;
    if (e.recovery_time_s) {
      recovered += 1;
      rec += *e.recovery_time_s;
    }
  }
  out[0] = count;
  out[1] = count;
  if (count > 0) {
    out[2] = height / count;
    out[3] = amp / count;
    out[4] = rise / count;
  }
  if (recovered > 0) out[5] = rec / recovered;
  return out;
}

void write_debug_dump(const std::filesystem::path& stem, const EdaDecomposition& d,
                      std::span<const ScrEvent> events) {
  std::vector<double> idx(d.clean.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
  auto csv_path = stem;
  csv_path += ".csv";
  sigcore::write_numeric_csv(csv_path, {"idx", "clean", "tonic", "phasic"}, {&idx, &d.clean, &d.tonic, &d.phasic});
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : events) {
    nlohmann::json ev{{"onset_idx", e.onset_idx},
                      {"peak_idx", e.peak_idx},
                      {"height", e.height},
                      {"amplitude", e.amplitude},
                      {"rise_time_s", e.rise_time_s}};
    ev["recovery_idx"] = e.recovery_idx ? nlohmann::json(*e.recovery_idx) : nlohmann::json(nullptr);
    ev["recovery_time_s"] = e.recovery_time_s ? nlohmann::json(*e.recovery_time_s) : nlohmann::json(nullptr);
    j.push_back(ev);
  }
  auto json_path = stem;
  json_path += ".json";
  std::ofstream out(json_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + json_path.string());
  out << j.dump(2) << '\n';
}

}  // namespace stressfuse::edaproc

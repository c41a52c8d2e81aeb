#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace stressfuse::edaproc {

struct EdaConfig {
  double clean_cutoff_hz = 1.0;
  double tonic_cutoff_hz = 0.05;
  double median_window_s = 4.0;
  double min_amplitude = 0.01;  // microsiemens
};

// clean = tonic + phasic holds exactly, element by element. Where that is not
// representable for the input value, clean and tonic are rounded to a
// power-of-two grid about one ulp of the trace maximum wide.
struct EdaDecomposition {
  std::vector<double> clean;
  std::vector<double> tonic;
  std::vector<double> phasic;
};

struct ScrEvent {
  std::size_t onset_idx = 0;
  std::size_t peak_idx = 0;
  double height = 0.0;     // phasic value at the peak
  double amplitude = 0.0;  // peak minus onset value
  double rise_time_s = 0.0;
  std::optional<std::size_t> recovery_idx;
  std::optional<double> recovery_time_s;  // peak to 50% amplitude decay

  bool operator==(const ScrEvent&) const = default;
};

inline constexpr std::size_t kMinEdaSamples = 5;

// Replaces NaN runs by linear interpolation between the nearest finite
// neighbours; leading and trailing runs take the nearest finite value.
// Returns false when no finite sample exists.
bool bridge_nans(std::vector<double>& x);

// Zero-phase second-order low-pass. When the cutoff is at or above Nyquist
// every representable component is already in the pass band and the input
// is returned unchanged. NaN samples are bridged by linear interpolation for
// filtering and restored as NaN in the output.
std::vector<double> clean_eda(std::span<const double> raw, double fs, const EdaConfig& cfg = {});

// Tonic: centered moving median over median_window_s, then zero-phase
// low-pass at tonic_cutoff_hz. Phasic: clean - tonic.
EdaDecomposition decompose(std::span<const double> clean, double fs, const EdaConfig& cfg = {});

std::vector<ScrEvent> detect_scr(std::span<const double> phasic, double fs, double min_amplitude = 0.01);

inline constexpr std::size_t kScrAggregateCount = 6;

// [onset count, peak count, mean height, mean amplitude, mean rise time,
//  mean recovery time] over events whose peak lies in
// [window_start, window_start + window_len). Empty means are 0; the recovery
// mean runs over events that recovered.
std::array<double, kScrAggregateCount> scr_window_aggregates(std::span<const ScrEvent> events,
                                                             std::size_t window_start, std::size_t window_len,
                                                             double fs);

// Debug dump: <stem>.csv with idx,clean,tonic,phasic and <stem>.json with the events.
void write_debug_dump(const std::filesystem::path& stem, const EdaDecomposition& d,
                      std::span<const ScrEvent> events);

}  // namespace stressfuse::edaproc

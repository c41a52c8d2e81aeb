#include "stressfuse/featex/windows.hpp"

#include <cmath>
#include <string>

#include "stressfuse/common/error.hpp"
#include "stressfuse/common/log.hpp"
#include "stressfuse/sigcore/types.hpp"

namespace stressfuse::featex {

void WindowSpec::validate() const {
  if (window_s == 0) throw SpecError("window_s must be positive");
  if (step_s == 0 || step_s > window_s) throw SpecError("step_s must be in (0, window_s]");
}

std::vector<Window> windows(std::size_t session_len, const WindowSpec& spec) {
  spec.validate();
  std::vector<Window> out;
  if (session_len < spec.window_s) {
    log_warn("session of " + std::to_string(session_len) + " s is shorter than the " +
             std::to_string(spec.window_s) + " s window; no windows produced");
    return out;
  }
  const std::size_t count = (session_len - spec.window_s) / spec.step_s + 1;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back({i * spec.step_s, i * spec.step_s + spec.window_s});
  return out;
}

int bin_label(std::span<const double> window_stress) {
  if (window_stress.empty()) throw LabelError("empty stress window");
  double sum = 0.0;
  for (double v : window_stress) {
    if (!(v >= sigcore::kStressMin && v <= sigcore::kStressMax))
      throw LabelError("stress value outside [0, 19]: " + std::to_string(v));
    sum += v;
  }
  const double mean = sum / static_cast<double>(window_stress.size());
  const double m = std::floor(mean + 0.5);
  if (m <= 6.0) return 0;
  if (m <= 13.0) return 1;
  return 2;
}

}  // namespace stressfuse::featex

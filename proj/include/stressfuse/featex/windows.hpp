#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stressfuse::featex {

struct WindowSpec {
  std::size_t window_s = 40;
  std::size_t step_s = 20;
  static constexpr double rate_hz = 1.0;

  void validate() const;
};

struct Window {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
  bool operator==(const Window&) const = default;
};

// Windows start at 0 and advance by step_s. A session shorter than one
// window yields no windows and a warning.
std::vector<Window> windows(std::size_t session_len, const WindowSpec& spec);

// Window mean rounded half-up, then binned 0-6 / 7-13 / 14-19.
int bin_label(std::span<const double> window_stress);

}  // namespace stressfuse::featex

#pragma once

#include <span>
#include <vector>

namespace stressfuse::edaproc {

// Second-order section in direct form II transposed, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

// Second-order Butterworth low-pass by bilinear transform with prewarping.
// Requires 0 < cutoff_hz < fs / 2.
Biquad butterworth_lowpass(double cutoff_hz, double fs);

// Causal filtering starting from the steady state of x[0].
std::vector<double> lfilter(const Biquad& f, std::span<const double> x);

// Zero-phase forward-backward filtering with odd-extension padding of
// min(9, n - 1) samples and steady-state initial conditions, as in the
// common filtfilt convention. The magnitude response is squared.
std::vector<double> filtfilt(const Biquad& f, std::span<const double> x);

}  // namespace stressfuse::edaproc

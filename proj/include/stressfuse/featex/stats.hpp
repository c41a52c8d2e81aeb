#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace stressfuse::featex {

inline constexpr std::size_t kStatCount = 15;

// Column order of stat_features().
enum class Stat : std::size_t {
  kAbsEnergy = 0,
  kFourierEntropy,
  kSkewness,
  kAutocorrelation,
  kQuantile,
  kKurtosis,
  kCountAboveMean,
  kCountBelowMean,
  kVariationCoefficient,
  kRms,
  kVariance,
  kMean,
  kStd,
  kMax,
  kMin,
};

// Short names used in feature column names, e.g. "energy_X2", "below_mean_EDA_Tonic".
inline constexpr std::array<std::string_view, kStatCount> kStatNames = {
    "energy", "fourier_entropy", "skew", "autocorr", "quantile", "kurtosis", "above_mean", "below_mean",
    "variation", "RMS", "variance", "avg", "std", "max", "min"};

struct StatParams {
  double quantile = 0.75;
  std::size_t autocorr_lag = 1;
};

using StatVector = std::array<double, kStatCount>;

// Fifteen window statistics:
//   energy        sum of squares
//   fourier_entropy  Shannon entropy (nats) of the normalized one-sided
//                 periodogram of the mean-removed window
//   skew          bias-corrected sample skewness (0 when n < 3 or std = 0)
//   autocorr      lag-l autocorrelation, sum (x_t - m)(x_{t+l} - m) / ((n - l) var)
//   quantile      linear-interpolated quantile
//   kurtosis      bias-corrected excess kurtosis (0 when n < 4 or std = 0)
//   above_mean / below_mean  strict counts
//   variation     sample std / mean (0 when mean = 0)
//   RMS, variance (population), avg, std (sample), max, min
// A constant window yields exact zeros for every dispersion-based value.
StatVector stat_features(std::span<const double> x, const StatParams& params = {});

}  // namespace stressfuse::featex

#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

namespace stressfuse {

// Counter-based generator built on the SplitMix64 finalizer. Output i of a
// stream is mix(key + i * gamma), so a stream is fully described by its key
// and independent streams are derived with split() instead of by consuming
// draws. Distributions are implemented here rather than taken from <random>
// so that generated data is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(mix(key ^ 0x6a09e667f3bcc909ULL)) {}

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * kGamma);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential(double rate);

  Rng split(std::uint64_t stream) const { return Rng(mix(key_ ^ mix(stream + kGamma)), 0); }
  Rng split(std::string_view label) const { return split(hash_label(label)); }

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  Rng(std::uint64_t raw_key, int) : key_(raw_key) {}

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stressfuse

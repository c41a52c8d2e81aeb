#include "stressfuse/sigcore/face.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace stressfuse::sigcore {
namespace {

constexpr std::array<std::size_t, kLandmarkCount> kMirror = [] {
  std::array<std::size_t, kLandmarkCount> m{};
  for (std::size_t i = 0; i < kLandmarkCount; ++i) m[i] = i;
  auto pair = [&m](std::size_t a, std::size_t b) {
    m[a] = b;
    m[b] = a;
  };
  for (std::size_t i = 0; i < 8; ++i) pair(i, 16 - i);
  for (std::size_t i = 0; i < 5; ++i) pair(17 + i, 26 - i);
  pair(31, 35);
  pair(32, 34);
  pair(36, 45);
  pair(37, 44);
  pair(38, 43);
  pair(39, 42);
  pair(40, 47);
  pair(41, 46);
  pair(48, 54);
  pair(49, 53);
  pair(50, 52);
  pair(55, 59);
  pair(56, 58);
  pair(60, 64);
  pair(61, 63);
  pair(65, 67);
  return m;
}();

// Fills the mirrored partner of every point whose x is negative.
void mirror_fill(Frame& f) {
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    const std::size_t j = kMirror[i];
    if (j == i) {
      f[i].x = 0.0;
    } else if (f[i].x < 0.0) {
      f[j] = {-f[i].x, f[i].y};
    }
  }
}

Frame build_face() {
  Frame f{};
  for (std::size_t i = 0; i <= 16; ++i) {
    const double t = static_cast<double>(i) / 16.0;
    f[i] = {-std::cos(std::numbers::pi * t), 1.1 * std::sin(std::numbers::pi * t) - 0.1};
  }
  f[17] = {-0.75, -0.42};
  f[18] = {-0.62, -0.50};
  f[19] = {-0.47, -0.53};
  f[20] = {-0.32, -0.51};
  f[21] = {-0.17, -0.46};
  f[27] = {0.0, -0.28};
  f[28] = {0.0, -0.14};
  f[29] = {0.0, 0.0};
  f[30] = {0.0, 0.14};
  f[31] = {-0.18, 0.25};
  f[32] = {-0.09, 0.28};
  f[33] = {0.0, 0.30};
  f[36] = {-0.60, -0.25};
  f[37] = {-0.50, -0.31};
  f[38] = {-0.40, -0.31};
  f[39] = {-0.30, -0.25};
  f[40] = {-0.40, -0.20};
  f[41] = {-0.50, -0.20};
  f[48] = {-0.35, 0.60};
  f[49] = {-0.22, 0.53};
  f[50] = {-0.10, 0.50};
  f[51] = {0.0, 0.52};
  f[57] = {0.0, 0.75};
  f[59] = {-0.22, 0.70};
  f[58] = {-0.10, 0.74};
  f[60] = {-0.28, 0.60};
  f[61] = {-0.10, 0.57};
  f[62] = {0.0, 0.575};
  f[66] = {0.0, 0.635};
  f[67] = {-0.10, 0.63};
  mirror_fill(f);
  return f;
}

Frame build_delta() {
  Frame d{};
  for (std::size_t i = 17; i <= 26; ++i) d[i].y = 0.07;
  d[20].x = 0.02;
  d[21].x = 0.03;
  d[23].x = -0.02;
  d[22].x = -0.03;
  for (std::size_t i : {37, 38, 43, 44}) d[i].y = 0.02;
  for (std::size_t i : {40, 41, 46, 47}) d[i].y = -0.01;
  d[48].x = 0.04;
  d[54].x = -0.04;
  d[60].x = 0.03;
  d[64].x = -0.03;
  for (std::size_t i : {61, 62, 63}) d[i].y = 0.015;
  for (std::size_t i : {65, 66, 67}) d[i].y = -0.015;
  d[51].y = 0.01;
  d[57].y = -0.01;
  return d;
}

}  // namespace

std::size_t mirror_landmark(std::size_t i) { return kMirror.at(i); }

const Frame& canonical_face() {
  static const Frame face = build_face();
  return face;
}

const Frame& tense_expression_delta() {
  static const Frame delta = build_delta();
  return delta;
}

}  // namespace stressfuse::sigcore

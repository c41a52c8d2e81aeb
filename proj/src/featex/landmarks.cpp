#include "stressfuse/featex/landmarks.hpp"

#include <cmath>

#include "stressfuse/common/error.hpp"

namespace stressfuse::featex {
namespace {

double dist(const sigcore::Point& a, const sigcore::Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

sigcore::Point centroid(const sigcore::Frame& f, std::size_t first, std::size_t last) {
  double x = 0.0, y = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    x += f[i].x;
    y += f[i].y;
  }
  const double n = static_cast<double>(last - first + 1);
  return {x / n, y / n};
}

}  // namespace

std::array<double, kGeometryCount> landmark_derived(const sigcore::Frame& f) {
  const double d = dist(centroid(f, 36, 41), centroid(f, 42, 47));
  if (!(d > 0.0)) throw DegenerateFrameError("eye centres coincide; inter-ocular distance is zero");
  auto nd = [&](std::size_t a, std::size_t b) { return dist(f[a], f[b]) / d; };

  const double open_r = 0.5 * (dist(f[37], f[41]) + dist(f[38], f[40]));
  const double open_l = 0.5 * (dist(f[43], f[47]) + dist(f[44], f[46]));
  const double mouth_w = dist(f[48], f[54]);
  const double mouth_h = dist(f[51], f[57]);

  std::array<double, kGeometryCount> g{};
  g[0] = open_r / dist(f[36], f[39]);
  g[1] = open_l / dist(f[42], f[45]);
  g[2] = open_r / d;
  g[3] = open_l / d;
  g[4] = mouth_w / d;
  g[5] = mouth_h / d;
  g[6] = mouth_h / mouth_w;
  g[7] = nd(21, 39);
  g[8] = nd(22, 42);
  g[9] = nd(17, 36);
  g[10] = nd(26, 45);
  g[11] = 0.5 * ((f[17].y - f[21].y) + (f[26].y - f[22].y)) / d;
  g[12] = nd(33, 8);
  g[13] = nd(0, 16);
  g[14] = (dist(f[48], f[33]) - dist(f[54], f[33])) / d;
  g[15] = d / dist(f[0], f[16]);
  g[16] = nd(21, 22);
  g[17] = nd(31, 35);
  g[18] = nd(27, 33);
  g[19] = nd(33, 51);
  g[20] = nd(57, 8);
  g[21] = nd(62, 66);
  g[22] = nd(60, 64);
  g[23] = nd(48, 36);
  g[24] = nd(54, 45);
  g[25] = nd(4, 30);
  g[26] = nd(12, 30);
  g[27] = nd(19, 27);
  g[28] = nd(24, 27);
  g[29] = nd(8, 27);
  return g;
}

}  // namespace stressfuse::featex

#pragma once

#include <cmath>
#include <cstddef>

namespace densereg::detail {

/// Align-corners source coordinate for output index i.
inline double align_corners_coord(int i, int in_size, int out_size) {
  if (out_size == 1) return 0.5 * (in_size - 1);
  return i * (static_cast<double>(in_size - 1) / (out_size - 1));
}

/// Bilinear sample with edge clamping. `stride` is the distance between
/// horizontally adjacent samples.
inline float sample_clamped(const float* base, int w, int h, std::size_t stride, double x, double y) {
  x = x < 0.0 ? 0.0 : (x > w - 1 ? w - 1 : x);
  y = y < 0.0 ? 0.0 : (y > h - 1 ? h - 1 : y);
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = x0 + 1 < w ? x0 + 1 : x0;
  const int y1 = y0 + 1 < h ? y0 + 1 : y0;
  const double fx = x - x0;
  const double fy = y - y0;
  const auto v = [&](int xx, int yy) {
    return static_cast<double>(base[(static_cast<std::size_t>(yy) * w + xx) * stride]);
  };
  const double top = (1.0 - fx) * v(x0, y0) + fx * v(x1, y0);
  const double bot = (1.0 - fx) * v(x0, y1) + fx * v(x1, y1);
  return static_cast<float>((1.0 - fy) * top + fy * bot);
}

/// True when (x, y) lies inside the sampling domain [0, w-1] x [0, h-1].
inline bool inside(int w, int h, double x, double y) {
  return x >= 0.0 && y >= 0.0 && x <= w - 1 && y <= h - 1;
}

}  // namespace densereg::detail

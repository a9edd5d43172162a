#include <cmath>

#include "densereg/kernels.hpp"

namespace densereg::kernels::reference {

namespace {

// Deliberately plain: no clamping tricks, explicit four-tap blend.
double bilinear(const float* plane, int w, std::size_t stride, double x, double y, int h) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto v = [&](int xx, int yy) {
    if (xx > w - 1) xx = w - 1;
    if (yy > h - 1) yy = h - 1;
    return static_cast<double>(plane[(static_cast<std::size_t>(yy) * w + xx) * stride]);
  };
  const double top = (1.0 - fx) * v(x0, y0) + fx * v(x0 + 1, y0);
  const double bot = (1.0 - fx) * v(x0, y0 + 1) + fx * v(x0 + 1, y0 + 1);
  return (1.0 - fy) * top + fy * bot;
}

bool inside(int w, int h, Point2 p) { return p.x >= 0.0 && p.y >= 0.0 && p.x <= w - 1 && p.y <= h - 1; }

}  // namespace

std::vector<BestMatch> argmax_dot(std::span<const float> queries, const FeatureMap& dst) {
  const int channels = dst.channels;
  const std::size_t nq = queries.size() / channels;
  std::vector<BestMatch> best(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    for (int y = 0; y < dst.height; ++y)
      for (int x = 0; x < dst.width; ++x) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c)
          acc += static_cast<double>(queries[q * channels + c]) * static_cast<double>(dst.at(c, y, x));
        const std::int64_t idx = static_cast<std::int64_t>(y) * dst.width + x;
        if (best[q].index < 0 || acc > best[q].score) best[q] = {idx, acc};
      }
  }
  return best;
}

ImageBuffer warp_image(const ImageBuffer& src, const PullBack& map, int out_w, int out_h) {
  ImageBuffer out(out_w, out_h, src.channels);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      const auto p = map({double(x), double(y)});
      if (!p || !inside(src.width, src.height, *p)) continue;
      for (int c = 0; c < src.channels; ++c)
        out.at(x, y, c) = static_cast<float>(
            bilinear(src.samples.data() + c, src.width, static_cast<std::size_t>(src.channels), p->x, p->y, src.height));
    }
  return out;
}

FeatureMap warp_featuremap(const FeatureMap& src, const PullBack& map, int out_w, int out_h) {
  FeatureMap out(src.channels, out_h, out_w);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      const auto p = map({double(x), double(y)});
      if (!p || !inside(src.width, src.height, *p)) continue;
      for (int c = 0; c < src.channels; ++c)
        out.at(c, y, x) = static_cast<float>(bilinear(src.plane(c).data(), src.width, 1, p->x, p->y, src.height));
    }
  return out;
}

}  // namespace densereg::kernels::reference

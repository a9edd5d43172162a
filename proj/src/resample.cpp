#include <cmath>

#include "densereg/tensor_io.hpp"
#include "interp.hpp"

namespace densereg {

ImageBuffer resample_image(const ImageBuffer& img, int out_w, int out_h) {
  img.validate();
  if (out_w < 1 || out_h < 1) throw ContractError("resample_image: output dimensions must be >= 1");
  ImageBuffer out(out_w, out_h, img.channels);
  const int channels = img.channels;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_h; ++y) {
    const double sy = detail::align_corners_coord(y, img.height, out_h);
    for (int x = 0; x < out_w; ++x) {
      const double sx = detail::align_corners_coord(x, img.width, out_w);
      for (int c = 0; c < channels; ++c)
        out.at(x, y, c) = detail::sample_clamped(img.samples.data() + c, img.width, img.height,
                                                 static_cast<std::size_t>(channels), sx, sy);
    }
  }
  return out;
}

FeatureMap upsample_featuremap(const FeatureMap& fm, int out_h, int out_w) {
  fm.validate();
  if (out_w < 1 || out_h < 1) throw ContractError("upsample_featuremap: output dimensions must be >= 1");
  FeatureMap out(fm.channels, out_h, out_w);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < fm.channels; ++c) {
    const float* src = fm.plane(c).data();
    for (int y = 0; y < out_h; ++y) {
      const double sy = detail::align_corners_coord(y, fm.height, out_h);
      for (int x = 0; x < out_w; ++x)
        out.at(c, y, x) = detail::sample_clamped(src, fm.width, fm.height, 1,
                                                 detail::align_corners_coord(x, fm.width, out_w), sy);
    }
  }
  out.normalized = false;
  return out;
}

FeatureMap l2_normalize_channels(FeatureMap fm) {
  fm.validate();
  const std::size_t plane = fm.plane_size();
  const int channels = fm.channels;
  float* data = fm.data.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(plane); ++i) {
    double sq = 0.0;
    for (int c = 0; c < channels; ++c) {
      const double v = data[c * plane + i];
      sq += v * v;
    }
    if (sq == 0.0) continue;
    const double inv = 1.0 / std::sqrt(sq);
    for (int c = 0; c < channels; ++c) data[c * plane + i] = static_cast<float>(data[c * plane + i] * inv);
  }
  fm.normalized = true;
  return fm;
}

double max_norm_deviation(const FeatureMap& fm) {
  const std::size_t plane = fm.plane_size();
  double worst = 0.0;
  for (std::size_t i = 0; i < plane; ++i) {
    double sq = 0.0;
    for (int c = 0; c < fm.channels; ++c) {
      const double v = fm.data[c * plane + i];
      sq += v * v;
    }
    if (sq > 0.0) worst = std::max(worst, std::abs(std::sqrt(sq) - 1.0));
  }
  return worst;
}

}  // namespace densereg

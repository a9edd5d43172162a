#include "densereg/kernels.hpp"

#include <algorithm>

#include "interp.hpp"

namespace densereg::kernels {

namespace {
constexpr int kQueryBlock = 16;
}

std::vector<BestMatch> argmax_dot(std::span<const float> queries, const FeatureMap& dst, int tile_rows) {
  dst.validate();
  const int channels = dst.channels;
  if (queries.size() % channels != 0) throw ContractError("argmax_dot: query length not a multiple of F");
  const auto nq = static_cast<std::int64_t>(queries.size() / channels);
  std::vector<BestMatch> best(nq);
  if (nq == 0) return best;

  tile_rows = std::clamp(tile_rows, 1, dst.height);
  const int width = dst.width;
  const std::size_t plane = dst.plane_size();
  const std::int64_t nblocks = (nq + kQueryBlock - 1) / kQueryBlock;

#pragma omp parallel
  {
    std::vector<double> scores(static_cast<std::size_t>(kQueryBlock) * tile_rows * width);
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t block = 0; block < nblocks; ++block) {
      const std::int64_t q0 = block * kQueryBlock;
      const int nb = static_cast<int>(std::min<std::int64_t>(kQueryBlock, nq - q0));
      for (int b = 0; b < nb; ++b) best[q0 + b] = {-1, -2.0};

      for (int r0 = 0; r0 < dst.height; r0 += tile_rows) {
        const int rows = std::min(tile_rows, dst.height - r0);
        const std::size_t npx = static_cast<std::size_t>(rows) * width;
        const std::size_t offset = static_cast<std::size_t>(r0) * width;
        std::fill(scores.begin(), scores.begin() + nb * npx, 0.0);
        for (int c = 0; c < channels; ++c) {
          const float* row = dst.data.data() + c * plane + offset;
          for (int b = 0; b < nb; ++b) {
            const double s = queries[(q0 + b) * channels + c];
            if (s == 0.0) continue;
            double* acc = scores.data() + b * npx;
#pragma omp simd
            for (std::size_t i = 0; i < npx; ++i) acc[i] += s * static_cast<double>(row[i]);
          }
        }
        for (int b = 0; b < nb; ++b) {
          const double* acc = scores.data() + b * npx;
          BestMatch& bm = best[q0 + b];
          for (std::size_t i = 0; i < npx; ++i)
            if (bm.index < 0 || acc[i] > bm.score) bm = {static_cast<std::int64_t>(offset + i), acc[i]};
        }
      }
    }
  }
  return best;
}

std::vector<double> dot_map(std::span<const float> query, const FeatureMap& dst) {
  dst.validate();
  if (query.size() != static_cast<std::size_t>(dst.channels)) throw ContractError("dot_map: query length != F");
  const std::size_t plane = dst.plane_size();
  std::vector<double> out(plane, 0.0);
  for (int c = 0; c < dst.channels; ++c) {
    const double s = query[c];
    if (s == 0.0) continue;
    const float* row = dst.data.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) out[i] += s * static_cast<double>(row[i]);
  }
  return out;
}

ImageBuffer warp_image(const ImageBuffer& src, const PullBack& map, int out_w, int out_h) {
  src.validate();
  ImageBuffer out(out_w, out_h, src.channels);
  const int channels = src.channels;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      const auto p = map({double(x), double(y)});
      if (!p || !detail::inside(src.width, src.height, p->x, p->y)) continue;
      for (int c = 0; c < channels; ++c)
        out.at(x, y, c) = detail::sample_clamped(src.samples.data() + c, src.width, src.height,
                                                 static_cast<std::size_t>(channels), p->x, p->y);
    }
  return out;
}

FeatureMap warp_featuremap(const FeatureMap& src, const PullBack& map, int out_w, int out_h) {
  src.validate();
  FeatureMap out(src.channels, out_h, out_w);
  const int channels = src.channels;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      const auto p = map({double(x), double(y)});
      if (!p || !detail::inside(src.width, src.height, p->x, p->y)) continue;
      for (int c = 0; c < channels; ++c)
        out.at(c, y, x) = detail::sample_clamped(src.plane(c).data(), src.width, src.height, 1, p->x, p->y);
    }
  out.normalized = false;
  return out;
}

}  // namespace densereg::kernels

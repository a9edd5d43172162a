#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP implementation and a
// serial scalar reference in `kernels::reference` used by tests and the
// benchmark.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "densereg/core.hpp"

namespace densereg::kernels {

struct BestMatch {
  std::int64_t index = -1;  // row-major pixel index into the searched map
  double score = 0.0;
};

/// For each query vector (row-major, `queries.size() / dst.channels` rows)
/// returns the pixel of `dst` with the largest dot product. Ties go to the
/// smallest row-major index. Dot products accumulate in double over channels
/// in order, so results are bit-identical to the reference.
std::vector<BestMatch> argmax_dot(std::span<const float> queries, const FeatureMap& dst, int tile_rows);

/// Full score map for one query (debug path).
std::vector<double> dot_map(std::span<const float> query, const FeatureMap& dst);

/// Maps an output pixel (x, y) to a source position, or nullopt when the
/// position is undefined (projective point at infinity).
using PullBack = std::function<std::optional<Point2>(Point2)>;

/// out(x, y, c) = bilinear sample of src at map(x, y); 0 when the sample
/// falls outside [0, w-1] x [0, h-1].
ImageBuffer warp_image(const ImageBuffer& src, const PullBack& map, int out_w, int out_h);

/// Per-channel version of warp_image. `map` yields positions in src grid
/// coordinates. Clears `normalized`.
FeatureMap warp_featuremap(const FeatureMap& src, const PullBack& map, int out_w, int out_h);

namespace reference {

std::vector<BestMatch> argmax_dot(std::span<const float> queries, const FeatureMap& dst);
ImageBuffer warp_image(const ImageBuffer& src, const PullBack& map, int out_w, int out_h);
FeatureMap warp_featuremap(const FeatureMap& src, const PullBack& map, int out_w, int out_h);

}  // namespace reference

}  // namespace densereg::kernels

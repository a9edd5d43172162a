#include "densereg/matching.hpp"

#include <algorithm>
#include <cmath>

#include "densereg/kernels.hpp"

namespace densereg {

namespace {

void check_inputs(const FeatureMap& src, const FeatureMap& dst, const MatchGeometry& geom) {
  src.validate();
  dst.validate();
  if (!src.normalized || !dst.normalized)
    throw ContractError("matching requires unit-normalized feature maps");
  if (src.channels != dst.channels) throw ContractError("matching: channel count mismatch");
  if (!geom.src_image.valid() || !geom.dst_image.valid()) throw ContractError("matching: invalid image extents");
  if (geom.resolution == CorrelationResolution::full &&
      (src.width != geom.src_image.width || src.height != geom.src_image.height ||
       dst.width != geom.dst_image.width || dst.height != geom.dst_image.height))
    throw ContractError("matching: full resolution requires feature grids the size of the images");
}

std::vector<float> gather_queries(const FeatureMap& src, const KeypointSet& points, Extent image) {
  std::vector<float> q(points.size() * src.channels);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point2 p = points[i].location;
    if (!is_finite(p) || p.x < 0.0 || p.y < 0.0 || p.x > image.width || p.y > image.height)
      throw ContractError("matching: point outside the source image");
    const auto [gx, gy] = nearest_cell(p, src, image);
    for (int c = 0; c < src.channels; ++c) q[i * src.channels + c] = src.at(c, gy, gx);
  }
  return q;
}

}  // namespace

std::pair<int, int> nearest_cell(Point2 p, const FeatureMap& fm, Extent image) {
  const long gx = std::lround(p.x * fm.width / image.width);
  const long gy = std::lround(p.y * fm.height / image.height);
  return {static_cast<int>(std::clamp<long>(gx, 0, fm.width - 1)),
          static_cast<int>(std::clamp<long>(gy, 0, fm.height - 1))};
}

Point2 cell_to_image(int gx, int gy, const FeatureMap& fm, Extent image) {
  return {gx * image.width / fm.width, gy * image.height / fm.height};
}

CorrespondenceSet compute_correspondences(const FeatureMap& src, const FeatureMap& dst,
                                          const KeypointSet& points, const MatchGeometry& geom) {
  check_inputs(src, dst, geom);
  CorrespondenceSet out;
  if (points.empty()) return out;
  const auto queries = gather_queries(src, points, geom.src_image);
  const auto best = kernels::argmax_dot(queries, dst, geom.tile_rows);
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto gx = static_cast<int>(best[i].index % dst.width);
    const auto gy = static_cast<int>(best[i].index / dst.width);
    Correspondence c;
    const auto [sx, sy] = nearest_cell(points[i].location, src, geom.src_image);
    c.fixed_pt = cell_to_image(sx, sy, src, geom.src_image);
    c.moving_pt = cell_to_image(gx, gy, dst, geom.dst_image);
    c.similarity = std::clamp(best[i].score, -1.0, 1.0);
    out.push_back(c);
  }
  return out;
}

CorrespondenceSet match_bidirectional(const FeatureMap& fixed, const FeatureMap& moving,
                                      const KeypointSet& points, const MatchGeometry& geom) {
  auto forward = compute_correspondences(fixed, moving, points, geom);
  if (forward.empty()) return forward;
  KeypointSet seeds;
  seeds.reserve(forward.size());
  for (const auto& c : forward) seeds.push_back({c.moving_pt, c.similarity, KeypointSource::external});
  MatchGeometry back = geom;
  std::swap(back.src_image, back.dst_image);
  const auto backward = compute_correspondences(moving, fixed, seeds, back);
  for (std::size_t i = 0; i < forward.size(); ++i) forward[i].back_pt = backward[i].moving_pt;
  return forward;
}

FeatureMap correlation_map(const FeatureMap& src, const FeatureMap& dst, Point2 point, const MatchGeometry& geom) {
  check_inputs(src, dst, geom);
  const auto query = gather_queries(src, {{point, 0.0, KeypointSource::external}}, geom.src_image);
  const auto scores = kernels::dot_map(query, dst);
  FeatureMap out(1, dst.height, dst.width);
  std::transform(scores.begin(), scores.end(), out.data.begin(), [](double v) { return static_cast<float>(v); });
  return out;
}

}  // namespace densereg

#pragma once

#include "densereg/core.hpp"

namespace densereg {

/// Image-space frames the two feature grids cover. A grid of width Wg over
/// an image of width W places grid column i at image x = i * W / Wg.
struct MatchGeometry {
  Extent src_image;
  Extent dst_image;
  CorrelationResolution resolution = CorrelationResolution::full;
  int tile_rows = 64;
};

/// Grid cell nearest to an image-space point (clamped to the grid).
std::pair<int, int> nearest_cell(Point2 p, const FeatureMap& fm, Extent image);
Point2 cell_to_image(int gx, int gy, const FeatureMap& fm, Extent image);

/// For every point, the dst pixel with the highest cosine similarity to the
/// src vector at the point. Both maps must be unit-normalized. fixed_pt is the
/// image position of the src cell the point falls in, so both ends of a
/// correspondence sit on grid positions.
CorrespondenceSet compute_correspondences(const FeatureMap& src, const FeatureMap& dst,
                                          const KeypointSet& points, const MatchGeometry& geom);

/// Forward pass fixed -> moving, then backward pass moving -> fixed seeded at
/// each forward match; the backward hit is stored in back_pt.
CorrespondenceSet match_bidirectional(const FeatureMap& fixed, const FeatureMap& moving,
                                      const KeypointSet& points, const MatchGeometry& geom);

/// Cosine map of one point against all of dst, as a 1-channel feature map.
FeatureMap correlation_map(const FeatureMap& src, const FeatureMap& dst, Point2 point, const MatchGeometry& geom);

}  // namespace densereg

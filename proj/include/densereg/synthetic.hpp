#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "densereg/core.hpp"
#include "densereg/evaluation.hpp"

namespace densereg {

enum class SynthKind : std::uint8_t { identity, translation, affine, homography, poly3, homography_poly3 };

std::string_view to_string(SynthKind k);
SynthKind parse_synth_kind(std::string_view name);

struct SynthRanges {
  double max_rotation_deg = 18.0;
  double min_scale = 0.8;
  double max_scale = 1.2;
  double max_translation = 0.1;     // fraction of the image size
  double max_perspective = 0.05;    // projective terms, per half image size
  double cubic_amplitude = 30.0;    // peak local displacement, pixels
  int landmark_grid = 5;
};

/// Dark background with Gaussian blobs and vessel-like curves.
ImageBuffer synthetic_texture(int width, int height, std::uint64_t seed);

/// Ground-truth fixed -> moving map of the requested family, centred on the
/// image and drawn from `ranges`.
TransformChain sample_ground_truth(SynthKind kind, Extent size, const SynthRanges& ranges, std::uint64_t seed);

/// Smooth cubic displacement u -> u + d(u) with max |d| about `amplitude`.
TransformChain sample_cubic_warp(Extent size, double amplitude, std::uint64_t seed);

struct SyntheticPair {
  ImageBuffer fixed;
  ImageBuffer moving;
  LandmarkPairs landmarks;
  TransformChain ground_truth;  // fixed -> moving
};

/// moving := base; fixed := base pulled back through the ground truth, so
/// fixed(u) = moving(gt(u)) with no inversion. Landmarks are grid points of
/// the fixed image whose image lies inside the moving image.
SyntheticPair make_synthetic_pair(const ImageBuffer& base, const TransformChain& ground_truth, int landmark_grid = 5);
SyntheticPair generate_synthetic_pair(const ImageBuffer& base, SynthKind kind, const SynthRanges& ranges,
                                      std::uint64_t seed);

struct AnalyticFeatureSpec {
  int grid_width = 64;
  int grid_height = 64;
  int channels = 32;
  double bandwidth = 0.35;  // radians per grid cell
  std::uint64_t seed = 0;
};

/// Feature grids whose vectors are random Fourier features of the moving-image
/// position each cell corresponds to. Fixed cells that map outside the moving
/// image get zero vectors. Cosine similarity then depends only on the
/// distance between the underlying moving positions.
std::pair<FeatureMap, FeatureMap> analytic_feature_maps(const TransformChain& ground_truth, Extent fixed, Extent moving,
                                                        const AnalyticFeatureSpec& spec);

}  // namespace densereg

#pragma once

#include <cstdint>
#include <string>

#include "densereg/core.hpp"

namespace densereg {

struct DetectorParams {
  int octaves = 4;
  int scales_per_octave = 3;
  double base_sigma = 1.6;
  double contrast_threshold = 0.01;
  double edge_ratio = 10.0;
  double min_dist = 10.0;   // T_sift
  int max_points = 1000;    // K

  void validate() const;
};

/// Difference-of-Gaussians extrema, strongest first, thinned so that every
/// retained pair is more than `min_dist` apart, capped at `max_points`.
KeypointSet detect_texture_keypoints(const ImageBuffer& img, const DetectorParams& params);

/// Greedy strongest-first thinning used by the detector.
KeypointSet suppress_close_points(KeypointSet candidates, double min_dist, std::size_t max_points);

/// K points uniform over [0,w) x [0,h); deterministic per seed.
KeypointSet sample_random_keypoints(double w, double h, int count, std::uint64_t seed);

/// One "x,y" pair per line in resampled-image coordinates. Blank lines and
/// '#' comments are ignored.
KeypointSet load_keypoints_file(const std::string& path);
KeypointSet parse_keypoints(const std::string& text);
void write_keypoints_file(const KeypointSet& points, const std::string& path);

/// Detected points first, then random ones. Duplicates are kept.
KeypointSet assemble_candidates(const KeypointSet& detected, const KeypointSet& random);

namespace detail {
/// Separable Gaussian blur with edge clamping (single channel).
ImageBuffer gaussian_blur(const ImageBuffer& gray, double sigma);
}  // namespace detail

}  // namespace densereg

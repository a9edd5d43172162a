#include "densereg/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "densereg/random.hpp"
#include "densereg/transforms.hpp"

namespace densereg {

namespace {

void splat_gaussian(ImageBuffer& img, double cx, double cy, double sigma, double amp) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  const int x0 = std::max(0, static_cast<int>(cx) - r), x1 = std::min(img.width - 1, static_cast<int>(cx) + r);
  const int y0 = std::max(0, static_cast<int>(cy) - r), y1 = std::min(img.height - 1, static_cast<int>(cy) + r);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      img.at(x, y) += static_cast<float>(amp * std::exp(-0.5 * d2 / (sigma * sigma)));
    }
}

Transform affine(double a0, double a1, double a2, double b0, double b1, double b2) {
  Transform t = Transform::identity(TransformKind::affine);
  t.params = {a0, a1, a2, b0, b1, b2};
  return t;
}

}  // namespace

std::string_view to_string(SynthKind k) {
  switch (k) {
    case SynthKind::identity: return "identity";
    case SynthKind::translation: return "translation";
    case SynthKind::affine: return "affine";
    case SynthKind::homography: return "homography";
    case SynthKind::poly3: return "poly3";
    case SynthKind::homography_poly3: return "homography_poly3";
  }
  return "?";
}

SynthKind parse_synth_kind(std::string_view name) {
  for (auto k : {SynthKind::identity, SynthKind::translation, SynthKind::affine, SynthKind::homography,
                 SynthKind::poly3, SynthKind::homography_poly3})
    if (name == to_string(k)) return k;
  throw ContractError("unknown synthetic kind '" + std::string(name) + "'");
}

ImageBuffer synthetic_texture(int width, int height, std::uint64_t seed) {
  SplitMix64 rng(seed);
  ImageBuffer img(width, height, 1, 0.08f);
  const double area = double(width) * height;
  const int blobs = static_cast<int>(area / 900.0) + 8;
  for (int i = 0; i < blobs; ++i)
    splat_gaussian(img, rng.uniform(0, width), rng.uniform(0, height), rng.uniform(1.5, 5.0), rng.uniform(0.25, 0.8));
  // Vessel-like random walks with slowly turning heading.
  const int vessels = static_cast<int>(area / 12000.0) + 3;
  for (int v = 0; v < vessels; ++v) {
    double x = rng.uniform(0, width), y = rng.uniform(0, height);
    double heading = rng.uniform(0, 2 * std::numbers::pi);
    const double w = rng.uniform(0.8, 2.0);
    const int steps = static_cast<int>(rng.uniform(0.3, 0.8) * (width + height));
    for (int s = 0; s < steps; ++s) {
      heading += rng.uniform(-0.12, 0.12);
      x += std::cos(heading);
      y += std::sin(heading);
      if (x < 0 || y < 0 || x >= width || y >= height) break;
      if (s % 2 == 0) splat_gaussian(img, x, y, w, 0.15);
    }
  }
  for (float& v : img.samples) v = std::min(v, 1.0f);
  return img;
}

TransformChain sample_cubic_warp(Extent size, double amplitude, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const double cx = 0.5 * size.width, cy = 0.5 * size.height;
  const double half = 0.5 * std::max(size.width, size.height);
  const Transform to_unit = affine(-cx / half, 1.0 / half, 0.0, -cy / half, 0.0, 1.0 / half);
  const Transform from_unit = affine(cx, half, 0.0, cy, 0.0, half);
  // Displacement in unit coordinates; |sum of 4 cubic terms| <= 4 * c on [-1,1]^2.
  Transform local = Transform::identity(TransformKind::poly3);
  const double c = amplitude / half / 4.0;
  for (int k = 6; k < 10; ++k) {
    local.params[k] = c * rng.uniform(-1.0, 1.0);
    local.params[10 + k] = c * rng.uniform(-1.0, 1.0);
  }
  return TransformChain({to_unit, local, from_unit});
}

TransformChain sample_ground_truth(SynthKind kind, Extent size, const SynthRanges& r, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const double cx = 0.5 * size.width, cy = 0.5 * size.height;
  switch (kind) {
    case SynthKind::identity: return TransformChain(Transform::identity(TransformKind::affine));
    case SynthKind::translation:
      return TransformChain(Transform::translation(rng.uniform(-r.max_translation, r.max_translation) * size.width,
                                                   rng.uniform(-r.max_translation, r.max_translation) * size.height));
    case SynthKind::poly3: return sample_cubic_warp(size, r.cubic_amplitude, rng.next());
    default: break;
  }
  const double theta = rng.uniform(-r.max_rotation_deg, r.max_rotation_deg) * std::numbers::pi / 180.0;
  const double scale = rng.uniform(r.min_scale, r.max_scale);
  const double tx = rng.uniform(-r.max_translation, r.max_translation) * size.width;
  const double ty = rng.uniform(-r.max_translation, r.max_translation) * size.height;
  const double cs = scale * std::cos(theta), sn = scale * std::sin(theta);
  // Rotation/scale about the centre, then translation.
  Transform similarity = affine(cx + tx - cs * cx + sn * cy, cs, -sn, cy + ty - sn * cx - cs * cy, sn, cs);
  if (kind == SynthKind::affine) return TransformChain(similarity);

  const double half = 0.5 * std::max(size.width, size.height);
  const double px = rng.uniform(-r.max_perspective, r.max_perspective) / half;
  const double py = rng.uniform(-r.max_perspective, r.max_perspective) / half;
  // Perspective about the centre: w = 1 + px (x - cx) + py (y - cy); keep the centre fixed.
  const double w0 = 1.0 - px * cx - py * cy;
  const auto& a = similarity.params;
  std::array<double, 9> h{a[1] + a[0] * px, a[2] + a[0] * py, a[0] * w0,
                          a[4] + a[3] * px, a[5] + a[3] * py, a[3] * w0,
                          px,               py,               w0};
  const Transform homography = Transform::from_homography(h);
  if (kind == SynthKind::homography) return TransformChain(homography);
  return compose(TransformChain(homography), sample_cubic_warp(size, r.cubic_amplitude, rng.next()));
}

SyntheticPair make_synthetic_pair(const ImageBuffer& base, const TransformChain& gt, int landmark_grid) {
  SyntheticPair pair;
  pair.moving = base;
  pair.fixed = warp_image(base, gt, base.width, base.height);
  pair.ground_truth = gt;
  const double w = base.width, h = base.height;
  const int n = std::max(1, landmark_grid);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Point2 u{w * (0.15 + 0.7 * (n == 1 ? 0.5 : double(i) / (n - 1))),
                     h * (0.15 + 0.7 * (n == 1 ? 0.5 : double(j) / (n - 1)))};
      const auto v = try_apply_chain(gt, u);
      if (v && v->x >= 0.0 && v->y >= 0.0 && v->x <= w - 1 && v->y <= h - 1) pair.landmarks.push_back({u, *v});
    }
  return pair;
}

SyntheticPair generate_synthetic_pair(const ImageBuffer& base, SynthKind kind, const SynthRanges& ranges,
                                      std::uint64_t seed) {
  // Resample the transform until the landmark overlap is non-trivial.
  SplitMix64 rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto gt = sample_ground_truth(kind, base.extent(), ranges, rng.next());
    auto pair = make_synthetic_pair(base, gt, ranges.landmark_grid);
    if (pair.landmarks.size() >= 4 || kind == SynthKind::identity) return pair;
  }
  throw DegenerateConfiguration("could not sample a synthetic transform with enough overlap");
}

std::pair<FeatureMap, FeatureMap> analytic_feature_maps(const TransformChain& gt, Extent fixed, Extent moving,
                                                        const AnalyticFeatureSpec& spec) {
  if (spec.channels < 2 || spec.channels % 2 != 0) throw ContractError("analytic features need an even channel count");
  const int nf = spec.channels / 2;
  SplitMix64 rng(spec.seed);
  // Frequencies in radians per moving-image grid cell.
  std::vector<std::array<double, 2>> omega(nf);
  for (auto& w : omega) w = {spec.bandwidth * rng.normal(), spec.bandwidth * rng.normal()};
  const double cell_x = moving.width / spec.grid_width;
  const double cell_y = moving.height / spec.grid_height;
  const double norm = 1.0 / std::sqrt(double(nf));

  auto embed = [&](FeatureMap& fm, int gx, int gy, Point2 v) {
    const double qx = v.x / cell_x, qy = v.y / cell_y;
    for (int k = 0; k < nf; ++k) {
      const double phase = omega[k][0] * qx + omega[k][1] * qy;
      fm.at(2 * k, gy, gx) = static_cast<float>(norm * std::cos(phase));
      fm.at(2 * k + 1, gy, gx) = static_cast<float>(norm * std::sin(phase));
    }
  };

  FeatureMap fixed_fm(spec.channels, spec.grid_height, spec.grid_width);
  FeatureMap moving_fm(spec.channels, spec.grid_height, spec.grid_width);
  for (int gy = 0; gy < spec.grid_height; ++gy)
    for (int gx = 0; gx < spec.grid_width; ++gx) {
      embed(moving_fm, gx, gy, {gx * cell_x, gy * cell_y});
      const Point2 u{gx * fixed.width / spec.grid_width, gy * fixed.height / spec.grid_height};
      const auto v = try_apply_chain(gt, u);
      if (v && v->x >= 0.0 && v->y >= 0.0 && v->x < moving.width && v->y < moving.height) embed(fixed_fm, gx, gy, *v);
    }
  return {std::move(fixed_fm), std::move(moving_fm)};
}

}  // namespace densereg

#include "densereg/core.hpp"

#include <cmath>

namespace densereg {

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

namespace {

void check_scaling_args(Point2 p, double orig_w, double orig_h, double size) {
  if (!is_finite(p)) throw ContractError("coordinate conversion: non-finite point");
  if (!(orig_w > 0.0 && orig_h > 0.0 && size > 0.0))
    throw ContractError("coordinate conversion: sizes must be positive");
}

}  // namespace

Point2 to_resampled_coords(Point2 p, double orig_w, double orig_h, double size) {
  check_scaling_args(p, orig_w, orig_h, size);
  return {p.x * size / orig_w, p.y * size / orig_h};
}

Point2 to_original_coords(Point2 p, double orig_w, double orig_h, double size) {
  check_scaling_args(p, orig_w, orig_h, size);
  return {p.x * orig_w / size, p.y * orig_h / size};
}

ImageBuffer::ImageBuffer(int w, int h, int c, float fill)
    : width(w), height(h), channels(c) {
  if (w < 1 || h < 1) throw ContractError("image dimensions must be >= 1");
  if (c != 1 && c != 3) throw ContractError("image must have 1 or 3 channels");
  samples.assign(static_cast<std::size_t>(w) * h * c, fill);
}

void ImageBuffer::validate() const {
  if (width < 1 || height < 1) throw ContractError("image dimensions must be >= 1");
  if (channels != 1 && channels != 3) throw ContractError("image must have 1 or 3 channels");
  if (samples.size() != static_cast<std::size_t>(width) * height * channels)
    throw ContractError("image sample count does not match dimensions");
}

ImageBuffer to_grayscale(const ImageBuffer& img) {
  img.validate();
  if (img.channels == 1) return img;
  ImageBuffer out(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(x, y) = 0.299f * img.at(x, y, 0) + 0.587f * img.at(x, y, 1) + 0.114f * img.at(x, y, 2);
  return out;
}

FeatureMap::FeatureMap(int c, int h, int w, float fill) : channels(c), height(h), width(w) {
  if (c < 1 || h < 1 || w < 1) throw ContractError("feature map dimensions must be >= 1");
  data.assign(static_cast<std::size_t>(c) * h * w, fill);
}

std::vector<float> FeatureMap::vector_at(int y, int x) const {
  std::vector<float> v(channels);
  for (int c = 0; c < channels; ++c) v[c] = at(c, y, x);
  return v;
}

void FeatureMap::validate() const {
  if (channels < 1 || height < 1 || width < 1)
    throw ContractError("feature map dimensions must be >= 1");
  if (data.size() != static_cast<std::size_t>(channels) * height * width)
    throw ContractError("feature map data length does not match dimensions");
}

std::string_view to_string(CorrespondenceStatus s) {
  switch (s) {
    case CorrespondenceStatus::active: return "active";
    case CorrespondenceStatus::rejected_ic: return "rejected_ic";
    case CorrespondenceStatus::rejected_residual: return "rejected_residual";
  }
  return "?";
}

std::size_t count_active(std::span<const Correspondence> corrs) {
  std::size_t n = 0;
  for (const auto& c : corrs) n += c.active() ? 1 : 0;
  return n;
}

std::string_view to_string(TransformKind k) {
  switch (k) {
    case TransformKind::affine: return "affine";
    case TransformKind::homography: return "homography";
    case TransformKind::quadratic: return "quadratic";
    case TransformKind::poly3: return "poly3";
  }
  return "?";
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "affine") return TransformKind::affine;
  if (name == "homography") return TransformKind::homography;
  if (name == "quadratic") return TransformKind::quadratic;
  if (name == "poly3") return TransformKind::poly3;
  throw FormatError("unknown transform kind '" + std::string(name) + "'");
}

std::size_t param_count(TransformKind k) {
  switch (k) {
    case TransformKind::affine: return 6;
    case TransformKind::homography: return 9;
    case TransformKind::quadratic: return 12;
    case TransformKind::poly3: return 20;
  }
  return 0;
}

std::size_t min_correspondences(TransformKind k) {
  switch (k) {
    case TransformKind::affine: return 3;
    case TransformKind::homography: return 4;
    case TransformKind::quadratic: return 6;
    case TransformKind::poly3: return 10;
  }
  return 0;
}

Transform Transform::identity(TransformKind kind, Extent domain, Extent range) {
  Transform t;
  t.kind = kind;
  t.domain = domain;
  t.range = range;
  t.params.assign(param_count(kind), 0.0);
  if (kind == TransformKind::homography) {
    t.params[0] = t.params[4] = t.params[8] = 1.0;
  } else {
    const std::size_t terms = param_count(kind) / 2;
    t.params[1] = 1.0;          // x' <- x
    t.params[terms + 2] = 1.0;  // y' <- y
  }
  return t;
}

Transform Transform::translation(double dx, double dy) {
  Transform t = identity(TransformKind::affine);
  t.params[0] = dx;
  t.params[3] = dy;
  return t;
}

Transform Transform::from_homography(const std::array<double, 9>& h, Extent domain, Extent range) {
  if (std::abs(h[8]) < 1e-300) throw DegenerateConfiguration("homography with h33 = 0");
  Transform t;
  t.kind = TransformKind::homography;
  t.domain = domain;
  t.range = range;
  t.params.resize(9);
  for (int i = 0; i < 9; ++i) t.params[i] = h[i] / h[8];
  t.validate();
  return t;
}

void Transform::validate() const {
  if (params.size() != param_count(kind))
    throw ContractError("transform '" + std::string(to_string(kind)) + "' expects " +
                        std::to_string(param_count(kind)) + " params, got " +
                        std::to_string(params.size()));
  for (double v : params)
    if (!std::isfinite(v)) throw ContractError("transform has non-finite parameter");
  if (kind == TransformKind::homography) {
    const auto& h = params;
    const double det = h[0] * (h[4] * h[8] - h[5] * h[7]) - h[1] * (h[3] * h[8] - h[5] * h[6]) +
                       h[2] * (h[3] * h[7] - h[4] * h[6]);
    if (std::abs(det) <= 1e-12) throw DegenerateConfiguration("singular homography");
  }
}

std::string_view to_string(FeatureSource s) {
  switch (s) {
    case FeatureSource::fmap_file: return "fmap_file";
    case FeatureSource::cnn: return "cnn";
    case FeatureSource::diffusion: return "diffusion";
  }
  return "?";
}

std::string_view to_string(CorrelationResolution r) {
  return r == CorrelationResolution::full ? "full" : "feature_native";
}

void RegistrationConfig::validate() const {
  if (resample_size <= 0) throw ContractError("resample_size must be > 0");
  if (keypoints_per_sampler < 0) throw ContractError("keypoints_per_sampler must be >= 0");
  if (!(min_keypoint_dist > 0.0 && inverse_consistency_threshold > 0.0 &&
        residual_threshold_stage1 > 0.0 && residual_threshold_stage2 > 0.0))
    throw ContractError("thresholds must be > 0");
  if (residual_iterations < 1) throw ContractError("residual_iterations must be >= 1");
  if (tile_rows < 1) throw ContractError("tile_rows must be >= 1");
}

void EvaluationThresholds::validate() const {
  if (auc_threshold < 1) throw ContractError("T_AUC must be >= 1");
}

}  // namespace densereg

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace densereg {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed file header or unsupported format variant.
struct FormatError : Error { using Error::Error; };
/// Payload shorter/longer than the header promises.
struct LengthError : Error { using Error::Error; };
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
  std::size_t line;
};
struct IoError : Error { using Error::Error; };
/// A documented precondition was violated by the caller.
struct ContractError : Error { using Error::Error; };
/// Too few active correspondences to fit the requested model.
struct InsufficientCorrespondences : Error { using Error::Error; };
/// Point configuration does not determine the model (collinear, rank deficient).
struct DegenerateConfiguration : Error { using Error::Error; };
/// Homography denominator vanished for a point.
struct PointAtInfinity : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// x = column (rightward), y = row (downward), origin at the top-left pixel.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

double distance(Point2 a, Point2 b);
bool is_finite(Point2 p);

/// Width/height of a coordinate frame in pixels.
struct Extent {
  double width = 0.0;
  double height = 0.0;

  bool valid() const { return width > 0.0 && height > 0.0; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

Point2 to_resampled_coords(Point2 p, double orig_w, double orig_h, double size);
Point2 to_original_coords(Point2 p, double orig_w, double orig_h, double size);

// ---------------------------------------------------------------------------
// Raster data
// ---------------------------------------------------------------------------

/// Interleaved row-major samples normalized to [0,1].
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> samples;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, float fill = 0.0f);

  float& at(int x, int y, int c = 0) {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c = 0) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  Extent extent() const { return {double(width), double(height)}; }
  void validate() const;
};

/// Rec. 601 luma for RGB input, copy otherwise.
ImageBuffer to_grayscale(const ImageBuffer& img);

/// Dense C x H x W tensor, channel-major. The per-pixel vector of (x, y) is
/// strided by height*width.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;
  bool normalized = false;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, float fill = 0.0f);

  std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
  float& at(int c, int y, int x) {
    return data[static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(y) * width + x];
  }
  float at(int c, int y, int x) const {
    return data[static_cast<std::size_t>(c) * plane_size() + static_cast<std::size_t>(y) * width + x];
  }
  std::span<const float> plane(int c) const {
    return {data.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::vector<float> vector_at(int y, int x) const;
  void validate() const;
};

// ---------------------------------------------------------------------------
// Points and correspondences
// ---------------------------------------------------------------------------

enum class KeypointSource : std::uint8_t { detected, random, external };

struct Keypoint {
  Point2 location;
  double response = 0.0;
  KeypointSource source = KeypointSource::detected;
};

using KeypointSet = std::vector<Keypoint>;

enum class CorrespondenceStatus : std::uint8_t { active, rejected_ic, rejected_residual };

std::string_view to_string(CorrespondenceStatus s);

struct Correspondence {
  Point2 fixed_pt;                  // p
  Point2 moving_pt;                 // p'
  std::optional<Point2> back_pt;    // p'', filled by the backward pass
  double similarity = 0.0;
  CorrespondenceStatus status = CorrespondenceStatus::active;

  bool active() const { return status == CorrespondenceStatus::active; }
};

using CorrespondenceSet = std::vector<Correspondence>;

std::size_t count_active(std::span<const Correspondence> corrs);

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

enum class TransformKind : std::uint8_t { affine, homography, quadratic, poly3 };

std::string_view to_string(TransformKind k);
TransformKind parse_transform_kind(std::string_view name);

/// Number of stored parameters: 6, 9, 12, 20.
std::size_t param_count(TransformKind k);
/// Smallest number of correspondences that determines the model.
std::size_t min_correspondences(TransformKind k);

/// Maps FIXED coordinates to MOVING coordinates.
///
/// Polynomial kinds store, per output coordinate, coefficients over the
/// monomials [1, x, y, x^2, xy, y^2, x^3, x^2y, xy^2, y^3] truncated to the
/// degree of the kind; x' coefficients first, then y'. Homographies store the
/// 3x3 matrix row-major with h33 = 1.
///
/// `domain` and `range` record the frame sizes the parameters operate in
/// (zero when unspecified).
struct Transform {
  TransformKind kind = TransformKind::affine;
  std::vector<double> params;
  Extent domain;
  Extent range;

  static Transform identity(TransformKind kind, Extent domain = {}, Extent range = {});
  static Transform translation(double dx, double dy);
  static Transform from_homography(const std::array<double, 9>& h, Extent domain = {}, Extent range = {});

  void validate() const;
  friend bool operator==(const Transform&, const Transform&) = default;
};

/// Ordered composition; stages()[0] is applied first.
class TransformChain {
 public:
  TransformChain() = default;
  TransformChain(Transform t) { stages_.push_back(std::move(t)); }  // NOLINT(implicit)
  explicit TransformChain(std::vector<Transform> stages) : stages_(std::move(stages)) {}

  const std::vector<Transform>& stages() const { return stages_; }
  bool empty() const { return stages_.empty(); }

  friend bool operator==(const TransformChain&, const TransformChain&) = default;

 private:
  std::vector<Transform> stages_;
};

// Text format: kind line, params line (%.17g), "scale dw dh rw rh" line.
std::string format_transform(const Transform& t);
Transform parse_transform(std::string_view text);
/// A chain is its stages' blocks concatenated in application order.
std::string format_chain(const TransformChain& chain);
TransformChain parse_chain(std::string_view text);
void write_chain_file(const TransformChain& chain, const std::string& path);
TransformChain read_chain_file(const std::string& path);

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class FeatureSource : std::uint8_t { fmap_file, cnn, diffusion };
enum class CorrelationResolution : std::uint8_t { full, feature_native };

std::string_view to_string(FeatureSource s);
std::string_view to_string(CorrelationResolution r);

struct RegistrationConfig {
  int resample_size = 920;              // M
  int keypoints_per_sampler = 1000;     // K
  double min_keypoint_dist = 10.0;      // T_sift
  double inverse_consistency_threshold = 3.0;   // T_IC
  double residual_threshold_stage1 = 25.0;
  double residual_threshold_stage2 = 15.0;
  TransformKind stage1_kind = TransformKind::homography;
  TransformKind stage2_kind = TransformKind::poly3;
  TransformKind outlier_fit_kind = TransformKind::affine;
  FeatureSource feature_source = FeatureSource::fmap_file;
  std::uint64_t rng_seed = 0;
  CorrelationResolution correlation_resolution = CorrelationResolution::full;

  // Component switches for ablations.
  bool use_detected_points = true;
  bool use_random_points = true;
  bool use_inverse_consistency = true;
  bool use_residual_filter = true;
  bool two_stage = true;
  int residual_iterations = 1;
  int tile_rows = 64;

  void validate() const;
};

struct EvaluationThresholds {
  int auc_threshold = 25;  // T_AUC

  double success_threshold() const { return auc_threshold / 2.0; }  // T_SR
  void validate() const;
};

}  // namespace densereg

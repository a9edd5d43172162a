#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "densereg/core.hpp"
#include "densereg/keypoints.hpp"
#include "densereg/matching.hpp"
#include "densereg/outlier_filter.hpp"

namespace densereg {

struct StageConfig {
  TransformKind model_kind = TransformKind::homography;
  TransformKind outlier_fit_kind = TransformKind::affine;
  double ic_threshold = 3.0;
  double residual_threshold = 25.0;
  bool use_inverse_consistency = true;
  bool use_residual_filter = true;
  int residual_iterations = 1;
  MatchGeometry geometry;
};

struct StageResult {
  Transform transform;
  FilterReport report;
  CorrespondenceSet correspondences;
  double seconds = 0.0;
};

/// Raised when a stage cannot fit its model; carries the partial report.
struct StageFailure : InsufficientCorrespondences {
  StageFailure(const std::string& what, FilterReport report)
      : InsufficientCorrespondences(what), report(std::move(report)) {}
  FilterReport report;
};

/// match -> inverse consistency -> residual filter -> model fit on survivors.
/// The returned transform lives in the geometry's image frames.
StageResult register_stage(const FeatureMap& fixed, const FeatureMap& moving, const KeypointSet& points,
                           const StageConfig& cfg);

/// File locations for one pair.
struct PairInputs {
  std::string fixed_image;
  std::string moving_image;
  std::string fixed_fmap;
  std::string moving_fmap;
  std::optional<std::string> stage2_moving_fmap;
  std::optional<std::string> external_keypoints;
};

/// In-memory pair at original resolution plus its feature maps.
struct PairData {
  ImageBuffer fixed_image;
  ImageBuffer moving_image;
  FeatureMap fixed_fm;
  FeatureMap moving_fm;
  std::optional<FeatureMap> stage2_moving_fm;
  std::optional<KeypointSet> external_keypoints;
};

PairData load_pair(const PairInputs& inputs);

enum class RegistrationStatus : std::uint8_t { success, failed_insufficient };
std::string_view to_string(RegistrationStatus s);

struct StageDiagnostics {
  std::string name;
  FilterReport report;
  double seconds = 0.0;
};

struct RegistrationResult {
  RegistrationStatus status = RegistrationStatus::failed_insufficient;
  std::optional<Transform> stage1;  // original-resolution frames
  std::optional<Transform> stage2;
  std::optional<Transform> stage1_resampled;  // M x M frames
  std::optional<Transform> stage2_resampled;
  TransformChain total;             // stage2 first, then stage1
  std::size_t detected_points = 0;
  std::size_t random_points = 0;
  std::size_t external_points = 0;
  std::vector<StageDiagnostics> stages;
  std::string failure;
  double seconds = 0.0;

  bool ok() const { return status == RegistrationStatus::success; }
};

/// Candidate points on the M x M resampled fixed image.
KeypointSet sample_candidates(const PairData& pair, const RegistrationConfig& cfg,
                              std::size_t* detected = nullptr, std::size_t* random = nullptr);

/// Resamples the moving feature map onto the fixed grid through `global`
/// (resampled-frame transform) and renormalizes.
FeatureMap align_moving_features(const FeatureMap& moving, const FeatureMap& fixed_grid,
                                 const Transform& global, Extent frame);

RegistrationResult register_pair(const PairData& pair, const RegistrationConfig& cfg);
RegistrationResult register_pair(const PairInputs& inputs, const RegistrationConfig& cfg);

nlohmann::json to_json(const FilterReport& report);
nlohmann::json diagnostics_json(const RegistrationResult& result, const RegistrationConfig& cfg);

}  // namespace densereg

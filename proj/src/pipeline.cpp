#include "densereg/pipeline.hpp"

#include <chrono>

#include "densereg/kernels.hpp"
#include "densereg/random.hpp"
#include "densereg/tensor_io.hpp"
#include "densereg/transforms.hpp"

namespace densereg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr std::uint64_t kRandomPointStream = 1;

// Brings a raw feature map onto the grid the matcher expects and normalizes it.
FeatureMap prepare_features(const FeatureMap& fm, const RegistrationConfig& cfg) {
  fm.validate();
  if (cfg.correlation_resolution == CorrelationResolution::full &&
      (fm.width != cfg.resample_size || fm.height != cfg.resample_size))
    return l2_normalize_channels(upsample_featuremap(fm, cfg.resample_size, cfg.resample_size));
  return l2_normalize_channels(fm);
}

}  // namespace

std::string_view to_string(RegistrationStatus s) {
  return s == RegistrationStatus::success ? "success" : "failed_insufficient";
}

StageResult register_stage(const FeatureMap& fixed, const FeatureMap& moving, const KeypointSet& points,
                           const StageConfig& cfg) {
  const auto t0 = Clock::now();
  StageResult out;
  out.report.ic_threshold = cfg.ic_threshold;
  out.report.residual_threshold = cfg.residual_threshold;

  CorrespondenceSet corrs = cfg.use_inverse_consistency
                                ? match_bidirectional(fixed, moving, points, cfg.geometry)
                                : compute_correspondences(fixed, moving, points, cfg.geometry);
  out.report.input_count = corrs.size();
  if (cfg.use_inverse_consistency) corrs = inverse_consistency_filter(std::move(corrs), cfg.ic_threshold);
  out.report.kept_after_ic = count_active(corrs);
  out.report.kept_after_residual = out.report.kept_after_ic;

  try {
    if (cfg.use_residual_filter) {
      auto filtered = transform_residual_filter(std::move(corrs), cfg.outlier_fit_kind, cfg.residual_threshold,
                                                cfg.residual_iterations);
      corrs = std::move(filtered.correspondences);
      out.report.fitted_global = filtered.global;
      out.report.kept_after_residual = count_active(corrs);
    }
    out.transform = fit_transform(cfg.model_kind, corrs);
  } catch (const InsufficientCorrespondences& e) {
    throw StageFailure(e.what(), out.report);
  } catch (const DegenerateConfiguration& e) {
    throw StageFailure(e.what(), out.report);
  }
  out.transform.domain = cfg.geometry.src_image;
  out.transform.range = cfg.geometry.dst_image;
  out.correspondences = std::move(corrs);
  out.seconds = seconds_since(t0);
  return out;
}

PairData load_pair(const PairInputs& inputs) {
  PairData pair;
  pair.fixed_image = load_image(inputs.fixed_image);
  pair.moving_image = load_image(inputs.moving_image);
  pair.fixed_fm = read_fmap(inputs.fixed_fmap);
  pair.moving_fm = read_fmap(inputs.moving_fmap);
  if (inputs.stage2_moving_fmap) pair.stage2_moving_fm = read_fmap(*inputs.stage2_moving_fmap);
  if (inputs.external_keypoints) pair.external_keypoints = load_keypoints_file(*inputs.external_keypoints);
  return pair;
}

KeypointSet sample_candidates(const PairData& pair, const RegistrationConfig& cfg, std::size_t* detected,
                              std::size_t* random) {
  const int m = cfg.resample_size;
  KeypointSet first;
  if (pair.external_keypoints) {
    first = *pair.external_keypoints;
  } else if (cfg.use_detected_points && cfg.keypoints_per_sampler > 0) {
    DetectorParams params;
    params.min_dist = cfg.min_keypoint_dist;
    params.max_points = cfg.keypoints_per_sampler;
    first = detect_texture_keypoints(resample_image(pair.fixed_image, m, m), params);
  }
  KeypointSet second;
  if (cfg.use_random_points)
    second = sample_random_keypoints(m, m, cfg.keypoints_per_sampler,
                                     SplitMix64(cfg.rng_seed).split(kRandomPointStream).next());
  if (detected) *detected = first.size();
  if (random) *random = second.size();
  return assemble_candidates(first, second);
}

FeatureMap align_moving_features(const FeatureMap& moving, const FeatureMap& fixed_grid, const Transform& global,
                                 Extent frame) {
  const auto pull = [&](Point2 cell) -> std::optional<Point2> {
    const Point2 u = cell_to_image(static_cast<int>(cell.x), static_cast<int>(cell.y), fixed_grid, frame);
    const auto v = try_apply(global, u);
    if (!v) return std::nullopt;
    return Point2{v->x * moving.width / frame.width, v->y * moving.height / frame.height};
  };
  return l2_normalize_channels(kernels::warp_featuremap(moving, pull, fixed_grid.width, fixed_grid.height));
}

RegistrationResult register_pair(const PairData& pair, const RegistrationConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  RegistrationResult result;
  const double m = cfg.resample_size;
  const Extent frame{m, m};
  const Extent fixed_orig = pair.fixed_image.extent();
  const Extent moving_orig = pair.moving_image.extent();

  const FeatureMap fixed_fm = prepare_features(pair.fixed_fm, cfg);
  const FeatureMap moving_fm = prepare_features(pair.moving_fm, cfg);
  if (fixed_fm.channels != moving_fm.channels)
    throw ContractError("fixed and moving feature maps have different channel counts");

  const KeypointSet points = sample_candidates(pair, cfg, &result.detected_points, &result.random_points);
  if (pair.external_keypoints) {
    result.external_points = result.detected_points;
    result.detected_points = 0;
  }

  StageConfig stage;
  stage.outlier_fit_kind = cfg.outlier_fit_kind;
  stage.ic_threshold = cfg.inverse_consistency_threshold;
  stage.use_inverse_consistency = cfg.use_inverse_consistency;
  stage.use_residual_filter = cfg.use_residual_filter;
  stage.residual_iterations = cfg.residual_iterations;
  stage.geometry = {frame, frame, cfg.correlation_resolution, cfg.tile_rows};

  std::string current = "stage1";
  try {
    stage.model_kind = cfg.stage1_kind;
    stage.residual_threshold = cfg.residual_threshold_stage1;
    const StageResult s1 = register_stage(fixed_fm, moving_fm, points, stage);
    result.stages.push_back({current, s1.report, s1.seconds});
    result.stage1_resampled = s1.transform;
    result.stage1 = rescale_transform(s1.transform, fixed_orig, moving_orig);
    result.total = TransformChain(*result.stage1);

    if (cfg.two_stage) {
      current = "stage2";
      const FeatureMap aligned = pair.stage2_moving_fm ? prepare_features(*pair.stage2_moving_fm, cfg)
                                                       : align_moving_features(moving_fm, fixed_fm, s1.transform, frame);
      stage.model_kind = cfg.stage2_kind;
      stage.residual_threshold = cfg.residual_threshold_stage2;
      const StageResult s2 = register_stage(fixed_fm, aligned, points, stage);
      result.stages.push_back({current, s2.report, s2.seconds});
      result.stage2_resampled = s2.transform;
      result.stage2 = rescale_transform(s2.transform, fixed_orig, fixed_orig);
      result.total = compose(TransformChain(*result.stage1), TransformChain(*result.stage2));
    }
    result.status = RegistrationStatus::success;
  } catch (const StageFailure& e) {
    result.stages.push_back({current, e.report, 0.0});
    result.status = RegistrationStatus::failed_insufficient;
    result.failure = current + ": " + e.what();
    result.stage1.reset();
    result.stage2.reset();
    result.stage1_resampled.reset();
    result.stage2_resampled.reset();
    result.total = TransformChain();
  }
  result.seconds = seconds_since(t0);
  return result;
}

RegistrationResult register_pair(const PairInputs& inputs, const RegistrationConfig& cfg) {
  return register_pair(load_pair(inputs), cfg);
}

nlohmann::json to_json(const FilterReport& report) {
  nlohmann::json j{{"input_count", report.input_count},
                   {"kept_after_ic", report.kept_after_ic},
                   {"kept_after_residual", report.kept_after_residual},
                   {"ic_threshold", report.ic_threshold},
                   {"residual_threshold", report.residual_threshold}};
  if (report.fitted_global)
    j["fitted_global"] = {{"kind", to_string(report.fitted_global->kind)}, {"params", report.fitted_global->params}};
  else
    j["fitted_global"] = nullptr;
  return j;
}

nlohmann::json diagnostics_json(const RegistrationResult& result, const RegistrationConfig& cfg) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : result.stages)
    stages.push_back({{"name", s.name}, {"filter", to_json(s.report)}, {"seconds", s.seconds}});
  nlohmann::json j{
      {"status", to_string(result.status)},
      {"failure", result.failure},
      {"candidates", {{"detected", result.detected_points},
                      {"random", result.random_points},
                      {"external", result.external_points}}},
      {"stages", stages},
      {"seconds", result.seconds},
      {"config",
       {{"resample_size", cfg.resample_size},
        {"keypoints_per_sampler", cfg.keypoints_per_sampler},
        {"min_keypoint_dist", cfg.min_keypoint_dist},
        {"t_ic", cfg.inverse_consistency_threshold},
        {"t_trans_stage1", cfg.residual_threshold_stage1},
        {"t_trans_stage2", cfg.residual_threshold_stage2},
        {"stage1_kind", to_string(cfg.stage1_kind)},
        {"stage2_kind", to_string(cfg.stage2_kind)},
        {"outlier_fit_kind", to_string(cfg.outlier_fit_kind)},
        {"feature_source", to_string(cfg.feature_source)},
        {"correlation_resolution", to_string(cfg.correlation_resolution)},
        {"seed", cfg.rng_seed},
        {"two_stage", cfg.two_stage}}}};
  return j;
}

}  // namespace densereg

#include "densereg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace densereg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size())
    throw ContractError("config: bad value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ContractError("config: bad boolean '" + std::string(v) + "' for " + std::string(key));
}

}  // namespace

RegistrationConfig preset_config(std::string_view name) {
  RegistrationConfig cfg;
  if (name == "default" || name.empty()) return cfg;
  if (name == "fire") {
    cfg.resample_size = 920;
    cfg.residual_threshold_stage1 = 25;
    cfg.residual_threshold_stage2 = 15;
  } else if (name == "flori21") {
    cfg.resample_size = 1024;
    cfg.residual_threshold_stage1 = 40;
    cfg.residual_threshold_stage2 = 30;
  } else if (name == "lsfg") {
    cfg.resample_size = 740;
    cfg.residual_threshold_stage1 = 25;
    cfg.residual_threshold_stage2 = 25;
  } else {
    throw ContractError("unknown preset '" + std::string(name) + "'");
  }
  return cfg;
}

EvaluationThresholds preset_thresholds(std::string_view name) {
  if (name == "flori21") return {100};
  if (name == "fire" || name == "lsfg" || name == "default" || name.empty()) return {25};
  throw ContractError("unknown preset '" + std::string(name) + "'");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "resample_size",     "keypoints",          "min_keypoint_dist",   "t_ic",
      "t_trans_stage1",    "t_trans_stage2",     "stage1_kind",         "stage2_kind",
      "outlier_fit_kind",  "feature_source",     "seed",                "correlation_resolution",
      "detected_points",   "random_points",      "inverse_consistency", "residual_filter",
      "two_stage",         "residual_iterations", "tile_rows"};
  return keys;
}

void apply_config_entry(RegistrationConfig& cfg, std::string_view key, std::string_view raw) {
  const std::string_view v = trim(raw);
  if (key == "resample_size") cfg.resample_size = parse_number<int>(key, v);
  else if (key == "keypoints") cfg.keypoints_per_sampler = parse_number<int>(key, v);
  else if (key == "min_keypoint_dist") cfg.min_keypoint_dist = parse_number<double>(key, v);
  else if (key == "t_ic") cfg.inverse_consistency_threshold = parse_number<double>(key, v);
  else if (key == "t_trans_stage1") cfg.residual_threshold_stage1 = parse_number<double>(key, v);
  else if (key == "t_trans_stage2") cfg.residual_threshold_stage2 = parse_number<double>(key, v);
  else if (key == "stage1_kind") cfg.stage1_kind = parse_transform_kind(v);
  else if (key == "stage2_kind") cfg.stage2_kind = parse_transform_kind(v);
  else if (key == "outlier_fit_kind") cfg.outlier_fit_kind = parse_transform_kind(v);
  else if (key == "feature_source") {
    if (v == "fmap_file") cfg.feature_source = FeatureSource::fmap_file;
    else if (v == "cnn") cfg.feature_source = FeatureSource::cnn;
    else if (v == "diffusion") cfg.feature_source = FeatureSource::diffusion;
    else throw ContractError("config: unknown feature_source '" + std::string(v) + "'");
  } else if (key == "seed") cfg.rng_seed = parse_number<std::uint64_t>(key, v);
  else if (key == "correlation_resolution") {
    if (v == "full") cfg.correlation_resolution = CorrelationResolution::full;
    else if (v == "feature_native") cfg.correlation_resolution = CorrelationResolution::feature_native;
    else throw ContractError("config: unknown correlation_resolution '" + std::string(v) + "'");
  } else if (key == "detected_points") cfg.use_detected_points = parse_bool(key, v);
  else if (key == "random_points") cfg.use_random_points = parse_bool(key, v);
  else if (key == "inverse_consistency") cfg.use_inverse_consistency = parse_bool(key, v);
  else if (key == "residual_filter") cfg.use_residual_filter = parse_bool(key, v);
  else if (key == "two_stage") cfg.two_stage = parse_bool(key, v);
  else if (key == "residual_iterations") cfg.residual_iterations = parse_number<int>(key, v);
  else if (key == "tile_rows") cfg.tile_rows = parse_number<int>(key, v);
  else throw ContractError("config: unknown key '" + std::string(key) + "'");
}

RegistrationConfig parse_config(std::string_view text, RegistrationConfig cfg) {
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("config: expected 'key = value'", lineno);
    try {
      apply_config_entry(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return cfg;
}

RegistrationConfig load_config_file(const std::string& path, RegistrationConfig base) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string format_config(const RegistrationConfig& cfg) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::ostringstream os;
  os << "resample_size = " << cfg.resample_size << '\n'
     << "keypoints = " << cfg.keypoints_per_sampler << '\n'
     << "min_keypoint_dist = " << cfg.min_keypoint_dist << '\n'
     << "t_ic = " << cfg.inverse_consistency_threshold << '\n'
     << "t_trans_stage1 = " << cfg.residual_threshold_stage1 << '\n'
     << "t_trans_stage2 = " << cfg.residual_threshold_stage2 << '\n'
     << "stage1_kind = " << to_string(cfg.stage1_kind) << '\n'
     << "stage2_kind = " << to_string(cfg.stage2_kind) << '\n'
     << "outlier_fit_kind = " << to_string(cfg.outlier_fit_kind) << '\n'
     << "feature_source = " << to_string(cfg.feature_source) << '\n'
     << "seed = " << cfg.rng_seed << '\n'
     << "correlation_resolution = " << to_string(cfg.correlation_resolution) << '\n'
     << "detected_points = " << b(cfg.use_detected_points) << '\n'
     << "random_points = " << b(cfg.use_random_points) << '\n'
     << "inverse_consistency = " << b(cfg.use_inverse_consistency) << '\n'
     << "residual_filter = " << b(cfg.use_residual_filter) << '\n'
     << "two_stage = " << b(cfg.two_stage) << '\n'
     << "residual_iterations = " << cfg.residual_iterations << '\n'
     << "tile_rows = " << cfg.tile_rows << '\n';
  return os.str();
}

}  // namespace densereg

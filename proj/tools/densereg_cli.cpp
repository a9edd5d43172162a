// densereg command-line driver: register | evaluate | synth | filters-debug.
//
// Exit codes: 0 success, 1 I/O or configuration error, 2 registration failed
// for lack of correspondences.

#include <spdlog/spdlog.h>
#include <spdlog/sinks/stdout_color_sinks.h>

#include <CLI11.hpp>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include "densereg/config.hpp"
#include "densereg/evaluation.hpp"
#include "densereg/matching.hpp"
#include "densereg/outlier_filter.hpp"
#include "densereg/pipeline.hpp"
#include "densereg/synthetic.hpp"
#include "densereg/tensor_io.hpp"
#include "densereg/transforms.hpp"

namespace fs = std::filesystem;
using namespace densereg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFailed = 2;

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (char& c : f)
    if (c == '_') c = '-';
  return "--" + f;
}

struct ConfigFlags {
  std::string preset = "default";
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "Parameter bundle: default, fire, flori21, lsfg");
    app->add_option("--config", config_path, "key = value configuration file");
    for (const auto& key : config_keys()) app->add_option(flag_name(key), values[key], "config key " + key);
  }

  // preset < config file < flags
  RegistrationConfig resolve(const CLI::App* app) const {
    RegistrationConfig cfg = preset_config(preset);
    if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
    for (const auto& key : config_keys())
      if (app->count(flag_name(key)) > 0) apply_config_entry(cfg, key, values.at(key));
    cfg.validate();
    return cfg;
  }
};

struct PairFlags {
  std::string fixed, moving, fixed_fmap, moving_fmap, features_dir, stage2_fmap, keypoints;
  std::string pair_id = "pair";

  void attach(CLI::App* app) {
    app->add_option("--fixed", fixed, "Fixed image (PNG/PGM/PPM)");
    app->add_option("--moving", moving, "Moving image (PNG/PGM/PPM)");
    app->add_option("--fixed-fmap", fixed_fmap, "Fixed-image feature map (FMAP)");
    app->add_option("--moving-fmap", moving_fmap, "Moving-image feature map (FMAP)");
    app->add_option("--features-dir", features_dir, "Directory holding <pair-id>.<role>.fmap");
    app->add_option("--stage2-fmap", stage2_fmap, "Features of the globally aligned moving image");
    app->add_option("--keypoints-file", keypoints, "External keypoints file (x,y per line)");
    app->add_option("--pair-id", pair_id, "Name used for outputs and feature discovery");
  }

  PairInputs resolve() const {
    PairInputs in;
    in.fixed_image = fixed;
    in.moving_image = moving;
    in.fixed_fmap = fixed_fmap;
    in.moving_fmap = moving_fmap;
    if (!features_dir.empty()) {
      const fs::path dir(features_dir);
      if (in.fixed_fmap.empty()) in.fixed_fmap = (dir / (pair_id + ".fixed.fmap")).string();
      if (in.moving_fmap.empty()) in.moving_fmap = (dir / (pair_id + ".moving.fmap")).string();
      const fs::path s2 = dir / (pair_id + ".stage2.fmap");
      if (stage2_fmap.empty() && fs::exists(s2)) in.stage2_moving_fmap = s2.string();
    }
    if (!stage2_fmap.empty()) in.stage2_moving_fmap = stage2_fmap;
    if (!keypoints.empty()) in.external_keypoints = keypoints;
    if (in.fixed_image.empty() || in.moving_image.empty())
      throw ContractError("--fixed and --moving are required");
    if (in.fixed_fmap.empty() || in.moving_fmap.empty())
      throw ContractError("feature maps required: --fixed-fmap/--moving-fmap or --features-dir");
    return in;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

struct RegisterOutputs {
  bool overlay = false;
  bool warped = false;
};

// Registers one pair and writes its artifacts; returns the exit code.
int register_one(const PairInputs& inputs, const std::string& pair_id, const RegistrationConfig& cfg,
                 const fs::path& out_dir, const RegisterOutputs& extras, nlohmann::json* summary) {
  const PairData pair = load_pair(inputs);
  const RegistrationResult result = register_pair(pair, cfg);
  fs::create_directories(out_dir);
  const auto diag = diagnostics_json(result, cfg);
  write_text(out_dir / (pair_id + ".diagnostics.json"), diag.dump(2) + "\n");
  if (summary) *summary = diag;
  if (!result.ok()) {
    spdlog::warn("{}: registration failed: {}", pair_id, result.failure);
    return kExitFailed;
  }
  write_chain_file(result.total, (out_dir / (pair_id + ".transform.txt")).string());
  write_chain_file(*result.stage1, (out_dir / (pair_id + ".stage1.txt")).string());
  if (result.stage2) write_chain_file(*result.stage2, (out_dir / (pair_id + ".stage2.txt")).string());
  if (extras.warped || extras.overlay) {
    const ImageBuffer warped =
        warp_image(pair.moving_image, result.total, pair.fixed_image.width, pair.fixed_image.height);
    if (extras.warped) save_png(warped, (out_dir / (pair_id + ".warped.png")).string());
    if (extras.overlay) save_png(overlay_images(pair.fixed_image, warped), (out_dir / (pair_id + ".overlay.png")).string());
  }
  spdlog::info("{}: registered in {:.2f}s", pair_id, result.seconds);
  return kExitOk;
}

int run_register(const CLI::App* app, const ConfigFlags& cf, const PairFlags& pf, const std::string& out,
                 const std::string& manifest, int jobs, const RegisterOutputs& extras, bool json) {
  const RegistrationConfig cfg = cf.resolve(app);
  if (out.empty()) throw ContractError("--out is required");
  if (manifest.empty()) {
    nlohmann::json summary;
    const int code = register_one(pf.resolve(), pf.pair_id, cfg, out, extras, &summary);
    if (json) std::cout << summary.dump() << '\n';
    return code;
  }

  if (pf.features_dir.empty()) throw ContractError("--manifest requires --features-dir");
  const auto entries = read_manifest(manifest);
  std::vector<int> codes(entries.size(), kExitOk);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      PairFlags local = pf;
      local.fixed = entries[i].fixed_path;
      local.moving = entries[i].moving_path;
      local.pair_id = entries[i].pair_id;
      try {
        codes[i] = register_one(local.resolve(), entries[i].pair_id, cfg, out, extras, nullptr);
      } catch (const std::exception& e) {
        std::lock_guard lock(log_mutex);
        spdlog::error("{}: {}", entries[i].pair_id, e.what());
        codes[i] = kExitError;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  const auto failed = std::count(codes.begin(), codes.end(), kExitFailed);
  const auto errors = std::count(codes.begin(), codes.end(), kExitError);
  if (json)
    std::cout << nlohmann::json{{"pairs", entries.size()}, {"failed_insufficient", failed}, {"errors", errors}}.dump()
              << '\n';
  if (errors) return kExitError;
  return failed ? kExitFailed : kExitOk;
}

int run_evaluate(const std::string& manifest, const std::string& results_dir, int t_auc, const std::string& preset,
                 const std::string& report_path, bool json) {
  if (manifest.empty() || results_dir.empty()) throw ContractError("--manifest and --results-dir are required");
  EvaluationThresholds thresholds = preset_thresholds(preset);
  if (t_auc > 0) thresholds.auc_threshold = t_auc;
  thresholds.validate();
  const auto report = evaluate_results_dir(read_manifest(manifest), results_dir, thresholds);
  const auto j = to_json(report);
  if (!report_path.empty()) write_text(report_path, j.dump(2) + "\n");
  if (json)
    std::cout << j.dump() << '\n';
  else
    std::cout << format_table(report);
  return kExitOk;
}

struct SynthFlags {
  std::string kind = "homography";
  int count = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string base_image;
  int size = 256;
  int grid = 0;
  int channels = 32;
  double bandwidth = 0.35;
  double amplitude = SynthRanges{}.cubic_amplitude;
  int landmarks = 5;

  void attach(CLI::App* app) {
    app->add_option("--kind", kind, "identity, translation, affine, homography, poly3, homography_poly3");
    app->add_option("--count", count, "Number of pairs")->check(CLI::NonNegativeNumber);
    app->add_option("--seed", seed, "Base seed");
    app->add_option("--out-dir", out_dir, "Output directory")->required();
    app->add_option("--base-image", base_image, "Texture to deform instead of the built-in generator");
    app->add_option("--size", size, "Side of generated textures in pixels")->check(CLI::PositiveNumber);
    app->add_option("--grid", grid, "Feature grid side (default size/4)");
    app->add_option("--channels", channels, "Feature channels (even)");
    app->add_option("--bandwidth", bandwidth, "Feature frequency scale, radians per grid cell");
    app->add_option("--amplitude", amplitude, "Peak cubic displacement in pixels");
    app->add_option("--landmark-grid", landmarks, "Landmark grid side");
  }
};

int run_synth(const SynthFlags& s, bool json) {
  const SynthKind kind = parse_synth_kind(s.kind);
  const fs::path dir(s.out_dir);
  fs::create_directories(dir);
  std::optional<ImageBuffer> base_override;
  if (!s.base_image.empty()) base_override = to_grayscale(load_image(s.base_image));
  SynthRanges ranges;
  ranges.cubic_amplitude = s.amplitude;
  ranges.landmark_grid = s.landmarks;

  std::vector<ManifestEntry> manifest;
  for (int i = 0; i < s.count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "pair_%04d", i);
    const std::string pid = id;
    const std::uint64_t pair_seed = s.seed * 1000003ull + static_cast<std::uint64_t>(i);
    const ImageBuffer base = base_override ? *base_override : synthetic_texture(s.size, s.size, pair_seed);
    const SyntheticPair pair = generate_synthetic_pair(base, kind, ranges, pair_seed);
    AnalyticFeatureSpec spec;
    spec.grid_width = s.grid > 0 ? s.grid : std::max(1, base.width / 4);
    spec.grid_height = s.grid > 0 ? s.grid : std::max(1, base.height / 4);
    spec.channels = s.channels;
    spec.bandwidth = s.bandwidth;
    spec.seed = pair_seed;
    const auto [ffm, mfm] = analytic_feature_maps(pair.ground_truth, pair.fixed.extent(), pair.moving.extent(), spec);

    save_png(pair.fixed, (dir / (pid + ".fixed.png")).string());
    save_png(pair.moving, (dir / (pid + ".moving.png")).string());
    write_fmap(ffm, (dir / (pid + ".fixed.fmap")).string());
    write_fmap(mfm, (dir / (pid + ".moving.fmap")).string());
    write_landmarks(pair.landmarks, (dir / (pid + ".landmarks.csv")).string());
    write_chain_file(pair.ground_truth, (dir / (pid + ".gt.txt")).string());
    manifest.push_back({pid, pid + ".fixed.png", pid + ".moving.png", pid + ".landmarks.csv", s.kind});
  }
  write_manifest(manifest, (dir / "manifest.csv").string());
  if (json) std::cout << nlohmann::json{{"pairs", manifest.size()}, {"manifest", (dir / "manifest.csv").string()}}.dump() << '\n';
  return kExitOk;
}

int run_filters_debug(const CLI::App* app, const ConfigFlags& cf, const PairFlags& pf, const std::string& out,
                      const std::vector<double>& debug_point, bool json) {
  const RegistrationConfig cfg = cf.resolve(app);
  if (out.empty()) throw ContractError("--out is required");
  const PairData pair = load_pair(pf.resolve());
  const double m = cfg.resample_size;
  auto prep = [&](const FeatureMap& fm) {
    if (cfg.correlation_resolution == CorrelationResolution::full && (fm.width != m || fm.height != m))
      return l2_normalize_channels(upsample_featuremap(fm, cfg.resample_size, cfg.resample_size));
    return l2_normalize_channels(fm);
  };
  const FeatureMap fixed = prep(pair.fixed_fm);
  const FeatureMap moving = prep(pair.moving_fm);
  const MatchGeometry geom{{m, m}, {m, m}, cfg.correlation_resolution, cfg.tile_rows};
  const KeypointSet points = sample_candidates(pair, cfg);

  auto corrs = match_bidirectional(fixed, moving, points, geom);
  FilterReport report;
  report.input_count = corrs.size();
  report.ic_threshold = cfg.inverse_consistency_threshold;
  report.residual_threshold = cfg.residual_threshold_stage1;
  corrs = inverse_consistency_filter(std::move(corrs), cfg.inverse_consistency_threshold);
  report.kept_after_ic = report.kept_after_residual = count_active(corrs);
  int code = kExitOk;
  try {
    auto filtered = transform_residual_filter(std::move(corrs), cfg.outlier_fit_kind, cfg.residual_threshold_stage1,
                                              cfg.residual_iterations);
    corrs = std::move(filtered.correspondences);
    report.fitted_global = filtered.global;
    report.kept_after_residual = count_active(corrs);
  } catch (const InsufficientCorrespondences& e) {
    spdlog::warn("residual filter: {}", e.what());
    code = kExitFailed;
  } catch (const DegenerateConfiguration& e) {
    spdlog::warn("residual filter: {}", e.what());
    code = kExitFailed;
  }

  const fs::path dir(out);
  fs::create_directories(dir);
  std::ofstream csv(dir / (pf.pair_id + ".correspondences.csv"));
  csv << "fx,fy,mx,my,bx,by,similarity,status\n";
  for (const auto& c : corrs)
    csv << c.fixed_pt.x << ',' << c.fixed_pt.y << ',' << c.moving_pt.x << ',' << c.moving_pt.y << ','
        << (c.back_pt ? c.back_pt->x : 0.0) << ',' << (c.back_pt ? c.back_pt->y : 0.0) << ',' << c.similarity << ','
        << to_string(c.status) << '\n';
  if (debug_point.size() == 2)
    write_fmap(correlation_map(fixed, moving, {debug_point[0], debug_point[1]}, geom),
               (dir / (pf.pair_id + ".correlation.fmap")).string());
  const auto j = to_json(report);
  write_text(dir / (pf.pair_id + ".filters.json"), j.dump(2) + "\n");
  if (json) std::cout << j.dump() << '\n';
  return code;
}

void configure_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_mt("densereg"));
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("REG_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Dense-feature image registration"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Machine-readable JSON on stdout");

  auto* reg = app.add_subcommand("register", "Register one pair, or every row of a manifest");
  ConfigFlags reg_cfg;
  PairFlags reg_pair;
  std::string reg_out, reg_manifest;
  int jobs = 1;
  RegisterOutputs extras;
  reg_cfg.attach(reg);
  reg_pair.attach(reg);
  reg->add_option("--out", reg_out, "Output directory");
  reg->add_option("--manifest", reg_manifest, "Batch mode: manifest CSV");
  reg->add_option("--jobs", jobs, "Concurrent pairs in batch mode")->check(CLI::PositiveNumber);
  reg->add_flag("--overlay", extras.overlay, "Write <pair-id>.overlay.png");
  reg->add_flag("--warped", extras.warped, "Write <pair-id>.warped.png");
  reg->add_flag("--json", json, "Machine-readable JSON on stdout");

  auto* eval = app.add_subcommand("evaluate", "MLE / AUC / success rate over a manifest");
  std::string eval_manifest, eval_results, eval_preset = "default", eval_report;
  int t_auc = 0;
  eval->add_option("--manifest", eval_manifest, "Manifest CSV");
  eval->add_option("--results-dir", eval_results, "Directory with <pair_id>.transform.txt");
  eval->add_option("--t-auc", t_auc, "AUC threshold in pixels (T_SR = T_AUC / 2)");
  eval->add_option("--preset", eval_preset, "Dataset preset for default thresholds");
  eval->add_option("--report", eval_report, "Write the JSON report here");
  eval->add_flag("--json", json, "Machine-readable JSON on stdout");

  auto* synth = app.add_subcommand("synth", "Generate synthetic pairs with ground truth");
  SynthFlags sf;
  sf.attach(synth);
  synth->add_flag("--json", json, "Machine-readable JSON on stdout");

  auto* dbg = app.add_subcommand("filters-debug", "Dump stage-1 correspondences and filter decisions");
  ConfigFlags dbg_cfg;
  PairFlags dbg_pair;
  std::string dbg_out;
  std::vector<double> debug_point;
  dbg_cfg.attach(dbg);
  dbg_pair.attach(dbg);
  dbg->add_option("--out", dbg_out, "Output directory");
  dbg->add_option("--debug-point", debug_point, "x y: dump this point's correlation map")->expected(2);
  dbg->add_flag("--json", json, "Machine-readable JSON on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*reg) return run_register(reg, reg_cfg, reg_pair, reg_out, reg_manifest, jobs, extras, json);
    if (*eval) return run_evaluate(eval_manifest, eval_results, t_auc, eval_preset, eval_report, json);
    if (*synth) return run_synth(sf, json);
    if (*dbg) return run_filters_debug(dbg, dbg_cfg, dbg_pair, dbg_out, debug_point, json);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
  return kExitError;
}

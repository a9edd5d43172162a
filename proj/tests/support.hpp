#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "densereg/core.hpp"
#include "densereg/pipeline.hpp"
#include "densereg/random.hpp"
#include "densereg/synthetic.hpp"
#include "densereg/tensor_io.hpp"
#include "densereg/transforms.hpp"

namespace testsupport {

using namespace densereg;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    SplitMix64 rng(std::hash<std::string>{}(tag) ^ reinterpret_cast<std::uintptr_t>(this));
    path_ = std::filesystem::temp_directory_path() / ("densereg_" + tag + "_" + std::to_string(rng.next() % 1000000007));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline FeatureMap random_featuremap(SplitMix64& rng, int c, int h, int w, bool normalize = true) {
  FeatureMap fm(c, h, w);
  for (auto& v : fm.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return normalize ? l2_normalize_channels(fm) : fm;
}

struct OracleMatch {
  int x = -1;
  int y = -1;
  double score = -std::numeric_limits<double>::infinity();
};

/// Scalar brute force: cosine of the src vector at cell (sx, sy) with every
/// dst pixel, computed from scratch with explicit norms.
inline OracleMatch brute_force_match(const FeatureMap& src, int sx, int sy, const FeatureMap& dst) {
  double sn = 0.0;
  for (int c = 0; c < src.channels; ++c) sn += double(src.at(c, sy, sx)) * src.at(c, sy, sx);
  OracleMatch best;
  for (int y = 0; y < dst.height; ++y)
    for (int x = 0; x < dst.width; ++x) {
      double dot = 0.0, dn = 0.0;
      for (int c = 0; c < dst.channels; ++c) {
        dot += double(src.at(c, sy, sx)) * dst.at(c, y, x);
        dn += double(dst.at(c, y, x)) * dst.at(c, y, x);
      }
      const double cosv = (sn > 0 && dn > 0) ? dot / std::sqrt(sn * dn) : 0.0;
      if (cosv > best.score + 1e-12) best = {x, y, cosv};
    }
  return best;
}

/// Synthetic pair plus analytic feature grids, ready for register_pair.
struct SynthCase {
  SyntheticPair pair;
  PairData data;
};

inline SynthCase make_synth_case(SynthKind kind, std::uint64_t seed, int size = 256, int grid = 64,
                                 SynthRanges ranges = {}) {
  const ImageBuffer base = synthetic_texture(size, size, seed);
  SynthCase sc;
  sc.pair = generate_synthetic_pair(base, kind, ranges, seed);
  AnalyticFeatureSpec spec;
  spec.grid_width = spec.grid_height = grid;
  spec.seed = seed;
  auto [f, m] = analytic_feature_maps(sc.pair.ground_truth, sc.pair.fixed.extent(), sc.pair.moving.extent(), spec);
  sc.data.fixed_image = sc.pair.fixed;
  sc.data.moving_image = sc.pair.moving;
  sc.data.fixed_fm = std::move(f);
  sc.data.moving_fm = std::move(m);
  return sc;
}

inline SynthCase make_case_from_chain(const TransformChain& gt, std::uint64_t seed, int size = 256, int grid = 64) {
  const ImageBuffer base = synthetic_texture(size, size, seed);
  SynthCase sc;
  sc.pair = make_synthetic_pair(base, gt);
  AnalyticFeatureSpec spec;
  spec.grid_width = spec.grid_height = grid;
  spec.seed = seed;
  auto [f, m] = analytic_feature_maps(gt, sc.pair.fixed.extent(), sc.pair.moving.extent(), spec);
  sc.data.fixed_image = sc.pair.fixed;
  sc.data.moving_image = sc.pair.moving;
  sc.data.fixed_fm = std::move(f);
  sc.data.moving_fm = std::move(m);
  return sc;
}

/// Engine settings used against analytic grids at M = 256.
inline RegistrationConfig synthetic_config(int m = 256) {
  RegistrationConfig cfg;
  cfg.resample_size = m;
  cfg.correlation_resolution = CorrelationResolution::feature_native;
  return cfg;
}

/// Largest ||a(p) - b(p)|| over an n x n grid spanning [lo, hi]^2.
inline double max_grid_error(const TransformChain& a, const TransformChain& b, double lo, double hi, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Point2 p{lo + (hi - lo) * i / (n - 1), lo + (hi - lo) * j / (n - 1)};
      worst = std::max(worst, distance(apply_chain(a, p), apply_chain(b, p)));
    }
  return worst;
}

}  // namespace testsupport

#include <doctest.h>

#include <cmath>

#include "densereg/config.hpp"
#include "densereg/core.hpp"
#include "densereg/random.hpp"
#include "support.hpp"

using namespace densereg;

TEST_SUITE("core") {
  TEST_CASE("resampled coordinates") {
    CHECK(to_resampled_coords({0, 0}, 2912, 2912, 920) == Point2{0, 0});
    CHECK(to_resampled_coords({2912, 2912}, 2912, 2912, 920) == Point2{920, 920});
    // 1456 * 920 / 2912 = 460, 728 * 920 / 2912 = 230 exactly in rationals
    const Point2 r = to_resampled_coords({1456, 728}, 2912, 2912, 920);
    CHECK(r.x == doctest::Approx(1456.0 * 920 / 2912).epsilon(1e-15));
    CHECK(r.x == doctest::Approx(460.0));
    CHECK(r.y == doctest::Approx(230.0));
    const Point2 o = to_original_coords({460, 230}, 2912, 2912, 920);
    CHECK(o.x == doctest::Approx(1456.0));
    CHECK(o.y == doctest::Approx(728.0));
    CHECK(to_original_coords({0, 0}, 17, 33, 5) == Point2{0, 0});
  }

  TEST_CASE("coordinate round trip") {
    SplitMix64 rng(7);
    for (int i = 0; i < 2000; ++i) {
      const double w = rng.uniform(10, 4000), h = rng.uniform(10, 4000), m = rng.uniform(64, 1500);
      const Point2 p{rng.uniform(-5000, 5000), rng.uniform(-5000, 5000)};
      const Point2 q = to_original_coords(to_resampled_coords(p, w, h, m), w, h, m);
      CHECK(distance(p, q) < 1e-9);
    }
  }

  TEST_CASE("coordinate contract") {
    CHECK_THROWS_AS(to_resampled_coords({NAN, 0}, 10, 10, 5), ContractError);
    CHECK_THROWS_AS(to_resampled_coords({0, INFINITY}, 10, 10, 5), ContractError);
    CHECK_THROWS_AS(to_resampled_coords({0, 0}, 0, 10, 5), ContractError);
    CHECK_THROWS_AS(to_original_coords({0, 0}, 10, 10, -1), ContractError);
  }

  TEST_CASE("raster invariants") {
    CHECK_THROWS_AS(ImageBuffer(0, 3, 1), ContractError);
    CHECK_THROWS_AS(FeatureMap(1, 0, 1), ContractError);
    ImageBuffer img(2, 2, 1);
    img.samples.pop_back();
    CHECK_THROWS_AS(img.validate(), ContractError);
    FeatureMap fm(2, 2, 2);
    fm.at(1, 1, 0) = 3.0f;
    CHECK(fm.vector_at(1, 0) == std::vector<float>{0.0f, 3.0f});
  }

  TEST_CASE("transform kinds") {
    CHECK(param_count(TransformKind::affine) == 6);
    CHECK(param_count(TransformKind::homography) == 9);
    CHECK(param_count(TransformKind::quadratic) == 12);
    CHECK(param_count(TransformKind::poly3) == 20);
    CHECK(min_correspondences(TransformKind::affine) == 3);
    CHECK(min_correspondences(TransformKind::homography) == 4);
    CHECK(min_correspondences(TransformKind::quadratic) == 6);
    CHECK(min_correspondences(TransformKind::poly3) == 10);
    for (auto k : {TransformKind::affine, TransformKind::homography, TransformKind::quadratic, TransformKind::poly3})
      CHECK(parse_transform_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_transform_kind("spline"), FormatError);
  }

  TEST_CASE("transform validation") {
    Transform t = Transform::identity(TransformKind::affine);
    t.params.push_back(1.0);
    CHECK_THROWS_AS(t.validate(), ContractError);
    Transform h = Transform::identity(TransformKind::homography);
    h.params = {1, 2, 0, 2, 4, 0, 0, 0, 1};
    CHECK_THROWS_AS(h.validate(), DegenerateConfiguration);
    const Transform n = Transform::from_homography({2, 0, 4, 0, 2, 6, 0, 0, 2});
    CHECK(n.params == std::vector<double>{1, 0, 2, 0, 1, 3, 0, 0, 1});
  }

  TEST_CASE("transform serialization round trip") {
    SplitMix64 rng(11);
    for (auto k : {TransformKind::affine, TransformKind::homography, TransformKind::quadratic, TransformKind::poly3}) {
      for (int rep = 0; rep < 50; ++rep) {
        Transform t = Transform::identity(k, {rng.uniform(1, 999), 512}, {640, rng.uniform(1, 999)});
        for (auto& p : t.params) p += rng.uniform(-1, 1) * std::pow(10.0, rng.uniform(-12, 4));
        if (k == TransformKind::homography) t.params[8] = 1.0;
        const Transform back = parse_transform(format_transform(t));
        CHECK(back == t);
      }
    }
    const TransformChain chain({Transform::translation(1.5, -2.25), Transform::identity(TransformKind::poly3)});
    CHECK(parse_chain(format_chain(chain)) == chain);
  }

  TEST_CASE("transform text format") {
    const std::string text = format_transform(Transform::translation(5, 7));
    CHECK(text.rfind("affine\n5 1 0 7 0 1\nscale", 0) == 0);
    CHECK_THROWS_AS(parse_transform("affine\n1 2 3\nscale 0 0 0 0\n"), ParseError);
    try {
      parse_chain("affine\n5 1 0 7 0 1\nscale 0 0 0 0\nhomography\n1 0 x 0 1 0 0 0 1\nscale 0 0 0 0\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 5);
    }
  }

  TEST_CASE("chain file io") {
    testsupport::TempDir dir("core");
    const TransformChain chain(Transform::translation(3, 4));
    write_chain_file(chain, dir.file("t.txt"));
    CHECK(read_chain_file(dir.file("t.txt")) == chain);
    CHECK_THROWS_AS(read_chain_file(dir.file("missing.txt")), IoError);
  }

  TEST_CASE("config validation") {
    RegistrationConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.resample_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
    cfg = {};
    cfg.inverse_consistency_threshold = 0;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
    cfg = {};
    cfg.keypoints_per_sampler = -1;
    CHECK_THROWS_AS(cfg.validate(), ContractError);

    EvaluationThresholds th;
    CHECK(th.success_threshold() == 12.5);
    th.auc_threshold = 0;
    CHECK_THROWS_AS(th.validate(), ContractError);
  }
}

TEST_SUITE("config") {
  TEST_CASE("presets") {
    struct Row {
      const char* name;
      int m;
      double t1, t2;
      int auc;
    };
    for (const Row r : {Row{"fire", 920, 25, 15, 25}, Row{"flori21", 1024, 40, 30, 100}, Row{"lsfg", 740, 25, 25, 25}}) {
      CAPTURE(r.name);
      const auto cfg = preset_config(r.name);
      CHECK(cfg.resample_size == r.m);
      CHECK(cfg.residual_threshold_stage1 == r.t1);
      CHECK(cfg.residual_threshold_stage2 == r.t2);
      CHECK(cfg.inverse_consistency_threshold == 3.0);
      CHECK(cfg.keypoints_per_sampler == 1000);
      CHECK(cfg.stage1_kind == TransformKind::homography);
      CHECK(cfg.stage2_kind == TransformKind::poly3);
      CHECK(preset_thresholds(r.name).auc_threshold == r.auc);
    }
    CHECK(preset_thresholds("flori21").success_threshold() == 50.0);
    CHECK_THROWS_AS(preset_config("nope"), ContractError);
  }

  TEST_CASE("config text") {
    const auto cfg = parse_config(
        "# comment\nresample_size = 256\nt_ic=2.5  # trailing\n\nstage2_kind = quadratic\n"
        "correlation_resolution = feature_native\ntwo_stage = false\nseed = 42\n");
    CHECK(cfg.resample_size == 256);
    CHECK(cfg.inverse_consistency_threshold == 2.5);
    CHECK(cfg.stage2_kind == TransformKind::quadratic);
    CHECK(cfg.correlation_resolution == CorrelationResolution::feature_native);
    CHECK_FALSE(cfg.two_stage);
    CHECK(cfg.rng_seed == 42);
    CHECK_THROWS_AS(parse_config("bogus = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config("x = 1\nresample_size = abc\n"), ParseError);
    CHECK_THROWS_AS(parse_config("no equals sign\n"), ParseError);
  }

  TEST_CASE("every key round trips through the text form") {
    RegistrationConfig cfg = preset_config("lsfg");
    cfg.rng_seed = 99;
    cfg.use_random_points = false;
    cfg.residual_iterations = 3;
    cfg.outlier_fit_kind = TransformKind::homography;
    const auto back = parse_config(format_config(cfg));
    CHECK(format_config(back) == format_config(cfg));
    for (const auto& key : config_keys()) CHECK(format_config(cfg).find(key + " = ") != std::string::npos);
  }
}

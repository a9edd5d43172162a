#include <doctest.h>

#include <cmath>
#include <fstream>

#include "densereg/evaluation.hpp"
#include "densereg/synthetic.hpp"
#include "densereg/transforms.hpp"
#include "support.hpp"

using namespace densereg;

namespace {

// Counts, for each integer threshold, which pairs are under it, then
// averages; written without sharing code with the library.
double enumerate_auc(const std::vector<PairOutcome>& v, int t_auc) {
  long hits = 0;
  for (int t = 1; t <= t_auc; ++t)
    for (const auto& m : v)
      if (m && *m < t) ++hits;
  return double(hits) / (double(t_auc) * v.size());
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("mean landmark error") {
    const LandmarkPairs lm{{{10, 10}, {13, 14}}};
    CHECK(mean_landmark_error(TransformChain(Transform::identity(TransformKind::affine)), lm) == 5.0);
    CHECK(mean_landmark_error(TransformChain(Transform::translation(3, 4)), lm) == 0.0);
    CHECK_THROWS_AS(mean_landmark_error(TransformChain(Transform::translation(3, 4)), {}), ContractError);
  }

  TEST_CASE("auc examples") {
    CHECK(auc(std::vector<PairOutcome>{0.0, 0.0, 0.0}, 25) == 1.0);
    CHECK(auc(std::vector<PairOutcome>{12.5}, 25) == doctest::Approx(13.0 / 25));
    CHECK(auc(std::vector<PairOutcome>{12.5}, 25) == doctest::Approx(0.52));
    CHECK(auc(std::vector<PairOutcome>{std::nullopt}, 25) == 0.0);
    // strict: MLE exactly 1 is not under threshold 1
    CHECK(auc(std::vector<PairOutcome>{1.0}, 1) == 0.0);
    CHECK(auc(std::vector<PairOutcome>{0.999}, 1) == 1.0);
    CHECK_THROWS_AS(auc(std::vector<PairOutcome>{}, 25), ContractError);
    CHECK_THROWS_AS(auc(std::vector<PairOutcome>{1.0}, 0), ContractError);
  }

  TEST_CASE("success rate") {
    CHECK(success_rate(std::vector<PairOutcome>{10.0}, 12.5) == 1.0);
    CHECK(success_rate(std::vector<PairOutcome>{12.5}, 12.5) == 1.0);
    CHECK(success_rate(std::vector<PairOutcome>{12.6}, 12.5) == 0.0);
    CHECK(success_rate(std::vector<PairOutcome>{std::nullopt}, 1e9) == 0.0);
    CHECK(success_rate(std::vector<PairOutcome>{1.0, std::nullopt, 30.0, 2.0}, 12.5) == 0.5);
    CHECK_THROWS_AS(success_rate(std::vector<PairOutcome>{}, 12.5), ContractError);
    CHECK(registration_accuracy(std::vector<PairOutcome>{3.0, 2.0}, 3.0) == 0.5);
  }

  TEST_CASE("metric properties on random lists") {
    SplitMix64 rng(1);
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<PairOutcome> v;
      const int n = 1 + int(rng.next() % 20);
      for (int i = 0; i < n; ++i) {
        if (rng.uniform() < 0.2) v.push_back(std::nullopt);
        else v.push_back(rng.uniform(0, 40));
      }
      const int t = 1 + int(rng.next() % 50);
      const double a = auc(v, t);
      CHECK(a == doctest::Approx(enumerate_auc(v, t)).epsilon(1e-12));
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
      bool all_under_one = true;
      for (const auto& m : v) all_under_one &= m && *m < 1.0;
      CHECK((a == 1.0) == all_under_one);
      // success with T/2 (<=) dominates RA at T/2 (<) when no MLE sits on the boundary
      double ra_half = 0;
      for (const auto& m : v)
        if (m && *m < t / 2.0) ra_half += 1.0 / v.size();
      CHECK(success_rate(v, t / 2.0) >= ra_half - 1e-12);

      const std::size_t k = rng.next() % v.size();
      auto better = v;
      better[k] = v[k] ? *v[k] * rng.uniform() : rng.uniform(0, 40);
      CHECK(auc(better, t) >= a);
    }
  }

  TEST_CASE("summaries") {
    const EvaluationThresholds th{25};
    std::vector<PairEvaluation> pairs{{"a", "S", 2.0, 1.0, ""},
                                      {"b", "S", 20.0, 3.0, ""},
                                      {"c", "P", std::nullopt, std::nullopt, "failed"},
                                      {"d", "P", 4.0, 2.0, ""}};
    const auto r = evaluate_dataset(pairs, th);
    CHECK(r.overall.pairs == 4);
    CHECK(r.overall.registered == 3);
    CHECK(r.overall.successes == 2);
    CHECK(r.overall.success_rate == 0.5);
    CHECK(*r.overall.mean_mle == 3.0);
    CHECK(*r.overall.mean_mle_registered == doctest::Approx(26.0 / 3));
    CHECK(r.overall.auc == doctest::Approx(enumerate_auc({2.0, 20.0, std::nullopt, 4.0}, 25)));
    CHECK(r.categories.at("S").pairs == 2);
    CHECK(r.categories.at("S").auc == doctest::Approx(enumerate_auc({2.0, 20.0}, 25)));
    CHECK(r.categories.at("P").successes == 1);
    CHECK(*r.mean_seconds == 2.0);
    CHECK(*r.max_seconds == 3.0);
    const auto j = to_json(r);
    CHECK(j["overall"]["pairs"] == 4);
    CHECK(format_table(r).find("overall") != std::string::npos);
    CHECK_THROWS_AS(evaluate_dataset({}, th), ContractError);
  }

  TEST_CASE("identity suite scores perfectly") {
    std::vector<PairEvaluation> pairs;
    for (int i = 0; i < 5; ++i) {
      const LandmarkPairs lm{{{1.0 * i, 2}, {1.0 * i, 2}}, {{7, 8}, {7, 8}}};
      pairs.push_back({"p" + std::to_string(i), "", mean_landmark_error(Transform::identity(TransformKind::affine), lm),
                       std::nullopt, ""});
    }
    const auto r = evaluate_dataset(pairs, {25});
    CHECK(r.overall.auc == 1.0);
    CHECK(r.overall.success_rate == 1.0);
    CHECK(*r.overall.mean_mle == 0.0);
  }

  TEST_CASE("landmark and manifest files") {
    testsupport::TempDir dir("eval");
    const LandmarkPairs lm{{{1.25, 2.5}, {3, 4}}, {{0.1, 0.2}, {0.3, 1e-17}}};
    write_landmarks(lm, dir.file("lm.csv"));
    const auto back = read_landmarks(dir.file("lm.csv"));
    REQUIRE(back.size() == 2);
    CHECK(back[1].fixed == lm[1].fixed);
    CHECK(back[1].moving == lm[1].moving);
    CHECK_THROWS_AS(parse_landmarks("1,2,3\n"), ParseError);

    write_manifest({{"x", "f.png", "m.png", "x.csv", "S"}}, dir.file("manifest.csv"));
    const auto m = read_manifest(dir.file("manifest.csv"));
    REQUIRE(m.size() == 1);
    CHECK(m[0].fixed_path == (dir.path() / "f.png").string());
    CHECK(m[0].category == "S");
    write_file(dir.file("bad.csv"), "x,f.png,m.png,x.csv\n");
    CHECK_THROWS_AS(read_manifest(dir.file("bad.csv")), ParseError);
  }

  TEST_CASE("results directory") {
    testsupport::TempDir dir("evaldir");
    const auto res = dir.path() / "res";
    std::filesystem::create_directories(res);
    write_landmarks({{{10, 10}, {13, 14}}}, dir.file("a.csv"));
    write_landmarks({{{0, 0}, {0, 0}}}, dir.file("b.csv"));
    write_manifest({{"a", "a.png", "a.png", "a.csv", ""}, {"b", "b.png", "b.png", "b.csv", ""}}, dir.file("m.csv"));
    write_chain_file(Transform::identity(TransformKind::affine), (res / "a.transform.txt").string());
    const auto r = evaluate_results_dir(read_manifest(dir.file("m.csv")), res.string(), {25});
    CHECK(r.pairs[0].mle == 5.0);
    CHECK_FALSE(r.pairs[1].mle.has_value());
    CHECK(!r.pairs[1].note.empty());
    CHECK(r.overall.success_rate == 0.5);

    write_chain_file(Transform::identity(TransformKind::affine), (res / "zzz.transform.txt").string());
    CHECK_THROWS_AS(evaluate_results_dir(read_manifest(dir.file("m.csv")), res.string(), {25}), ContractError);
    CHECK_THROWS_AS(evaluate_results_dir({}, (dir.path() / "nope").string(), {25}), IoError);
  }
}

TEST_SUITE("synthetic") {
  TEST_CASE("identity pair") {
    const ImageBuffer base = synthetic_texture(64, 48, 3);
    const auto pair = generate_synthetic_pair(base, SynthKind::identity, {}, 1);
    CHECK(pair.fixed.samples == pair.moving.samples);
    CHECK(!pair.landmarks.empty());
    for (const auto& l : pair.landmarks) CHECK(l.fixed == l.moving);
  }

  TEST_CASE("translation-only homography") {
    const ImageBuffer base = synthetic_texture(128, 128, 4);
    const auto pair = make_synthetic_pair(base, Transform::from_homography({1, 0, 10, 0, 1, 6, 0, 0, 1}));
    CHECK(pair.landmarks.size() == 25);
    for (const auto& l : pair.landmarks) {
      CHECK(l.moving.x - l.fixed.x == doctest::Approx(10.0).epsilon(1e-12));
      CHECK(l.moving.y - l.fixed.y == doctest::Approx(6.0).epsilon(1e-12));
    }
    // fixed(u) = moving(u + (10, 6)) at integer pixels
    CHECK(pair.fixed.at(20, 30) == pair.moving.at(30, 36));
  }

  TEST_CASE("poly3 landmarks match direct polynomial evaluation") {
    SplitMix64 rng(5);
    Transform t = Transform::identity(TransformKind::poly3);
    for (int k = 0; k < 20; ++k) t.params[k] += (k % 10 >= 6 ? 1e-7 : k % 10 >= 3 ? 1e-5 : 1e-2) * rng.uniform(-1, 1);
    const auto pair = make_synthetic_pair(synthetic_texture(128, 128, 5), t);
    REQUIRE(!pair.landmarks.empty());
    for (const auto& l : pair.landmarks) {
      const double x = l.fixed.x, y = l.fixed.y;
      const double m[10] = {1, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y};
      double u = 0, v = 0;
      for (int k = 0; k < 10; ++k) {
        u += t.params[k] * m[k];
        v += t.params[10 + k] * m[k];
      }
      CHECK(std::abs(u - l.moving.x) < 1e-9);
      CHECK(std::abs(v - l.moving.y) < 1e-9);
    }
  }

  TEST_CASE("landmarks obey the ground truth for every kind") {
    for (auto kind : {SynthKind::translation, SynthKind::affine, SynthKind::homography, SynthKind::poly3,
                      SynthKind::homography_poly3}) {
      CAPTURE(to_string(kind));
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto pair = generate_synthetic_pair(synthetic_texture(96, 96, seed), kind, {}, seed);
        CHECK(pair.landmarks.size() >= 4);
        CHECK(mean_landmark_error(pair.ground_truth, pair.landmarks) < 1e-9);
        for (const auto& l : pair.landmarks) {
          CHECK(l.moving.x >= 0);
          CHECK(l.moving.x <= 95);
        }
      }
    }
    CHECK(parse_synth_kind("homography_poly3") == SynthKind::homography_poly3);
    CHECK_THROWS_AS(parse_synth_kind("bogus"), ContractError);
  }

  TEST_CASE("deterministic generation") {
    const auto a = generate_synthetic_pair(synthetic_texture(64, 64, 9), SynthKind::homography, {}, 9);
    const auto b = generate_synthetic_pair(synthetic_texture(64, 64, 9), SynthKind::homography, {}, 9);
    CHECK(a.fixed.samples == b.fixed.samples);
    CHECK(a.ground_truth == b.ground_truth);
  }

  TEST_CASE("sampled homographies stay in range") {
    const SynthRanges r;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto gt = sample_ground_truth(SynthKind::homography, {256, 256}, r, seed);
      REQUIRE(gt.stages().size() == 1);
      const auto& t = gt.stages()[0];
      CHECK(t.kind == TransformKind::homography);
      // the centre moves by at most the translation range plus perspective slack
      const Point2 c = apply_transform(t, {128, 128});
      CHECK(std::abs(c.x - 128) < 0.1 * 256 + 20);
      CHECK(std::abs(c.y - 128) < 0.1 * 256 + 20);
    }
  }

  TEST_CASE("analytic features") {
    const auto gt = TransformChain(Transform::translation(8, 0));
    AnalyticFeatureSpec spec;
    spec.grid_width = spec.grid_height = 32;
    spec.channels = 16;
    auto [f, m] = analytic_feature_maps(gt, {128, 128}, {128, 128}, spec);
    CHECK(f.channels == 16);
    CHECK(f.height == 32);
    // fixed cell (x) sees moving position x + 8, i.e. moving cell x + 2
    for (int c = 0; c < 16; ++c) CHECK(f.at(c, 5, 3) == doctest::Approx(m.at(c, 5, 5)).epsilon(1e-5));
    // cells that leave the moving image are zero
    for (int c = 0; c < 16; ++c) CHECK(f.at(c, 5, 31) == 0.0f);
    CHECK(max_norm_deviation(l2_normalize_channels(m)) < 1e-5);
  }
}

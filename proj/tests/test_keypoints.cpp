#include <doctest.h>

#include <cmath>

#include "densereg/keypoints.hpp"
#include "support.hpp"

using namespace densereg;

namespace {

ImageBuffer blobs(int w, int h, const std::vector<Point2>& centres, double sigma, double amplitude = 1.0) {
  ImageBuffer img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      for (const auto& c : centres) {
        const double dx = x - c.x, dy = y - c.y;
        v += amplitude * std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      }
      img.at(x, y) = static_cast<float>(std::min(1.0, v));
    }
  return img;
}

// Analytic DoG of a unit Gaussian blob of width s, between blur levels a < b,
// at distance r from its centre. Blurring a Gaussian adds variances.
double analytic_dog(double s, double a, double b, double r) {
  auto g = [&](double blur) {
    const double v = s * s + blur * blur;
    return s * s / v * std::exp(-r * r / (2 * v));
  };
  return g(b) - g(a);
}

}  // namespace

TEST_SUITE("keypoints") {
  TEST_CASE("constant image has no keypoints") {
    CHECK(detect_texture_keypoints(ImageBuffer(64, 64, 1, 0.4f), {}).empty());
    CHECK(detect_texture_keypoints(ImageBuffer(64, 64, 3, 0.0f), {}).empty());
  }

  TEST_CASE("single blob gives one keypoint at its centre") {
    const Point2 c{41.0, 37.0};
    const double s = 3.0;
    // |DoG| at the centre clears the contrast threshold at the blob's scale and
    // falls off monotonically with r, so the only extremum sits at the centre.
    const double k = std::pow(2.0, 1.0 / 3.0);
    CHECK(std::abs(analytic_dog(s, 1.6 * k, 1.6 * k * k, 0.0)) > 0.01);
    for (double r = 0.5; r < 3.0; r += 0.5)
      CHECK(std::abs(analytic_dog(s, 1.6 * k, 1.6 * k * k, r)) < std::abs(analytic_dog(s, 1.6 * k, 1.6 * k * k, r - 0.5)));

    const auto pts = detect_texture_keypoints(blobs(96, 96, {c}, s), {});
    REQUIRE(pts.size() == 1);
    CHECK(distance(pts[0].location, c) < 2.0);
    CHECK(pts[0].source == KeypointSource::detected);
  }

  TEST_CASE("two blobs closer than min_dist collapse to one point") {
    DetectorParams params;
    params.min_dist = 10.0;
    const auto pts = detect_texture_keypoints(blobs(96, 96, {{40, 48}, {45, 48}}, 2.0), params);
    CHECK(pts.size() == 1);
  }

  TEST_CASE("well separated blobs are all found") {
    const std::vector<Point2> centres{{20, 20}, {70, 24}, {30, 72}, {75, 75}};
    const auto pts = detect_texture_keypoints(blobs(100, 100, centres, 2.5), {});
    CHECK(pts.size() == 4);
    for (const auto& c : centres) {
      double best = 1e9;
      for (const auto& p : pts) best = std::min(best, distance(p.location, c));
      CHECK(best < 2.0);
    }
  }

  TEST_CASE("detection is translation-equivariant") {
    const std::vector<Point2> centres{{30, 30}, {66, 40}, {45, 70}};
    const auto base = detect_texture_keypoints(blobs(112, 112, centres, 2.5), {});
    REQUIRE(base.size() == 3);
    for (auto [dx, dy] : {std::pair{3, 0}, {0, 5}, {-4, 7}, {9, -6}}) {
      std::vector<Point2> moved;
      for (const auto& c : centres) moved.push_back({c.x + dx, c.y + dy});
      const auto shifted = detect_texture_keypoints(blobs(112, 112, moved, 2.5), {});
      REQUIRE(shifted.size() == base.size());
      for (const auto& p : base) {
        double best = 1e9;
        for (const auto& q : shifted) best = std::min(best, distance(q.location, {p.location.x + dx, p.location.y + dy}));
        CHECK(best < 1.0);
      }
    }
  }

  TEST_CASE("detected points respect spacing, count and bounds") {
    const ImageBuffer tex = synthetic_texture(200, 160, 9);
    for (double md : {3.0, 10.0, 25.0}) {
      DetectorParams params;
      params.min_dist = md;
      params.max_points = 60;
      const auto pts = detect_texture_keypoints(tex, params);
      CHECK(!pts.empty());
      CHECK(pts.size() <= 60);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].location.x >= 0);
        CHECK(pts[i].location.x < 200);
        CHECK(pts[i].location.y >= 0);
        CHECK(pts[i].location.y < 160);
        for (std::size_t j = i + 1; j < pts.size(); ++j) CHECK(distance(pts[i].location, pts[j].location) > md);
      }
    }
  }

  TEST_CASE("greedy suppression keeps the strongest") {
    KeypointSet c{{{0, 0}, 0.2}, {{3, 0}, -0.9}, {{20, 0}, 0.5}, {{23, 0}, 0.4}, {{50, 0}, 0.1}};
    auto kept = suppress_close_points(c, 10.0, 10);
    REQUIRE(kept.size() == 3);
    CHECK(kept[0].location == Point2{3, 0});
    CHECK(kept[1].location == Point2{20, 0});
    CHECK(kept[2].location == Point2{50, 0});
    CHECK(suppress_close_points(c, 10.0, 2).size() == 2);
    // distance exactly min_dist is suppressed
    CHECK(suppress_close_points({{{0, 0}, 1.0}, {{10, 0}, 0.5}}, 10.0, 5).size() == 1);
  }

  TEST_CASE("random sampler") {
    CHECK(sample_random_keypoints(100, 80, 0, 1).empty());
    const auto a = sample_random_keypoints(100, 80, 1000, 42);
    const auto b = sample_random_keypoints(100, 80, 1000, 42);
    const auto c = sample_random_keypoints(100, 80, 1000, 43);
    CHECK(a.size() == 1000);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].location == b[i].location);
      CHECK(a[i].source == KeypointSource::random);
      CHECK(a[i].location.x >= 0);
      CHECK(a[i].location.x < 100);
      CHECK(a[i].location.y >= 0);
      CHECK(a[i].location.y < 80);
      differs |= !(a[i].location == c[i].location);
    }
    CHECK(differs);
    for (const auto& p : sample_random_keypoints(1, 1, 500, 7)) {
      CHECK(p.location.x < 1.0);
      CHECK(p.location.y < 1.0);
    }
  }

  TEST_CASE("keypoints file") {
    const auto pts = parse_keypoints("0,0\n10.5,20.25\n");
    REQUIRE(pts.size() == 2);
    CHECK(pts[1].location == Point2{10.5, 20.25});
    CHECK(pts[1].source == KeypointSource::external);
    CHECK(parse_keypoints("").empty());
    CHECK(parse_keypoints("# header\n\n 1 , 2 \r\n").size() == 1);
    try {
      parse_keypoints("a,b");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 1);
    }
    try {
      parse_keypoints("1,2\n3,4\n5\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 3);
    }

    testsupport::TempDir dir("kp");
    write_keypoints_file(pts, dir.file("k.txt"));
    const auto back = load_keypoints_file(dir.file("k.txt"));
    REQUIRE(back.size() == 2);
    CHECK(back[0].location == pts[0].location);
    CHECK(back[1].location == pts[1].location);
    CHECK_THROWS_AS(load_keypoints_file(dir.file("none.txt")), IoError);
  }

  TEST_CASE("candidate assembly") {
    CHECK(assemble_candidates({}, {}).empty());
    const auto rnd = sample_random_keypoints(50, 50, 25, 1);
    KeypointSet det(25, Keypoint{{1, 1}, 1.0, KeypointSource::detected});
    const auto all = assemble_candidates(det, rnd);
    CHECK(all.size() == 50);
    CHECK(all.front().source == KeypointSource::detected);
    CHECK(all.back().source == KeypointSource::random);
  }
}

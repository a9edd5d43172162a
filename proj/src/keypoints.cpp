#include "densereg/keypoints.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "densereg/random.hpp"

namespace densereg {

double SplitMix64::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void DetectorParams::validate() const {
  if (octaves < 1 || scales_per_octave < 1 || !(base_sigma > 0.0) || !(contrast_threshold > 0.0) ||
      !(edge_ratio > 0.0) || max_points < 0 || min_dist < 0.0)
    throw ContractError("invalid DoG detector parameters");
}

namespace detail {

ImageBuffer gaussian_blur(const ImageBuffer& gray, double sigma) {
  if (gray.channels != 1) throw ContractError("gaussian_blur expects a single channel");
  if (sigma <= 0.0) return gray;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& k : kernel) k /= sum;

  const int w = gray.width;
  const int h = gray.height;
  ImageBuffer tmp(w, h, 1);
  ImageBuffer out(w, h, 1);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * gray.at(std::clamp(x + i, 0, w - 1), y);
      tmp.at(x, y) = static_cast<float>(acc);
    }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.at(x, std::clamp(y + i, 0, h - 1));
      out.at(x, y) = static_cast<float>(acc);
    }
  return out;
}

}  // namespace detail

namespace {

ImageBuffer halve(const ImageBuffer& img) {
  ImageBuffer out(std::max(1, img.width / 2), std::max(1, img.height / 2), 1);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = img.at(2 * x, 2 * y);
  return out;
}

ImageBuffer subtract(const ImageBuffer& a, const ImageBuffer& b) {
  ImageBuffer out(a.width, a.height, 1);
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = a.samples[i] - b.samples[i];
  return out;
}

bool is_extremum(const std::vector<ImageBuffer>& dog, int s, int x, int y) {
  const float v = dog[s].at(x, y);
  const bool is_max = v > 0.0f;
  for (int ds = -1; ds <= 1; ++ds)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (ds == 0 && dy == 0 && dx == 0) continue;
        const float n = dog[s + ds].at(x + dx, y + dy);
        if (is_max ? n > v : n < v) return false;
      }
  return true;
}

}  // namespace

KeypointSet suppress_close_points(KeypointSet candidates, double min_dist, std::size_t max_points) {
  std::stable_sort(candidates.begin(), candidates.end(), [](const Keypoint& a, const Keypoint& b) {
    return std::abs(a.response) > std::abs(b.response);
  });
  KeypointSet kept;
  for (const auto& c : candidates) {
    if (kept.size() >= max_points) break;
    const bool far = std::all_of(kept.begin(), kept.end(), [&](const Keypoint& k) {
      return distance(k.location, c.location) > min_dist;
    });
    if (far) kept.push_back(c);
  }
  return kept;
}

KeypointSet detect_texture_keypoints(const ImageBuffer& img, const DetectorParams& params) {
  params.validate();
  const ImageBuffer gray = to_grayscale(img);
  const int s = params.scales_per_octave;
  const double assumed_blur = 0.5;
  ImageBuffer base = detail::gaussian_blur(
      gray, std::sqrt(std::max(0.0, params.base_sigma * params.base_sigma - assumed_blur * assumed_blur)));

  const double edge_limit = (params.edge_ratio + 1.0) * (params.edge_ratio + 1.0) / params.edge_ratio;
  KeypointSet candidates;
  for (int octave = 0; octave < params.octaves; ++octave) {
    if (base.width < 8 || base.height < 8) break;
    std::vector<ImageBuffer> gauss{base};
    for (int k = 1; k < s + 3; ++k) {
      const double prev = params.base_sigma * std::pow(2.0, double(k - 1) / s);
      const double cur = params.base_sigma * std::pow(2.0, double(k) / s);
      gauss.push_back(detail::gaussian_blur(gauss.back(), std::sqrt(cur * cur - prev * prev)));
    }
    std::vector<ImageBuffer> dog;
    for (int k = 0; k + 1 < static_cast<int>(gauss.size()); ++k) dog.push_back(subtract(gauss[k + 1], gauss[k]));

    const double scale = std::ldexp(1.0, octave);
    const int w = base.width;
    const int h = base.height;
    for (int k = 1; k <= s; ++k) {
      const auto& d = dog[k];
      for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
          const float v = d.at(x, y);
          if (std::abs(v) <= 0.5 * params.contrast_threshold) continue;
          if (!is_extremum(dog, k, x, y)) continue;
          const double gx = 0.5 * (d.at(x + 1, y) - d.at(x - 1, y));
          const double gy = 0.5 * (d.at(x, y + 1) - d.at(x, y - 1));
          const double dxx = d.at(x + 1, y) + d.at(x - 1, y) - 2.0 * v;
          const double dyy = d.at(x, y + 1) + d.at(x, y - 1) - 2.0 * v;
          const double dxy = 0.25 * (d.at(x + 1, y + 1) - d.at(x - 1, y + 1) - d.at(x + 1, y - 1) + d.at(x - 1, y - 1));
          const double det = dxx * dyy - dxy * dxy;
          const double tr = dxx + dyy;
          if (det <= 0.0 || tr * tr / det >= edge_limit) continue;
          const double ox = std::clamp(-(dyy * gx - dxy * gy) / det, -0.5, 0.5);
          const double oy = std::clamp(-(dxx * gy - dxy * gx) / det, -0.5, 0.5);
          const double refined = v + 0.5 * (gx * ox + gy * oy);
          if (std::abs(refined) <= params.contrast_threshold) continue;
          Point2 loc{(x + ox) * scale, (y + oy) * scale};
          loc.x = std::clamp(loc.x, 0.0, std::nextafter(double(img.width), 0.0));
          loc.y = std::clamp(loc.y, 0.0, std::nextafter(double(img.height), 0.0));
          candidates.push_back({loc, refined, KeypointSource::detected});
        }
    }
    base = halve(gauss[s]);
  }
  return suppress_close_points(std::move(candidates), params.min_dist,
                               static_cast<std::size_t>(params.max_points));
}

KeypointSet sample_random_keypoints(double w, double h, int count, std::uint64_t seed) {
  if (count < 0) throw ContractError("sample_random_keypoints: negative count");
  if (!(w > 0.0 && h > 0.0)) throw ContractError("sample_random_keypoints: empty domain");
  SplitMix64 rng(seed);
  KeypointSet out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double x = rng.uniform() * w;
    const double y = rng.uniform() * h;
    out.push_back({{std::min(x, std::nextafter(w, 0.0)), std::min(y, std::nextafter(h, 0.0))}, 0.0,
                   KeypointSource::random});
  }
  return out;
}

KeypointSet parse_keypoints(const std::string& text) {
  KeypointSet out;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected 'x,y'", lineno);
    auto parse = [&](std::string_view tok) {
      while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
      while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw ParseError("invalid coordinate '" + std::string(tok) + "'", lineno);
      return v;
    };
    const std::string_view sv(line);
    const double x = parse(sv.substr(0, comma));
    const double y = parse(sv.substr(comma + 1));
    out.push_back({{x, y}, 0.0, KeypointSource::external});
  }
  return out;
}

KeypointSet load_keypoints_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open keypoint file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_keypoints(ss.str());
}

void write_keypoints_file(const KeypointSet& points, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  char buf[96];
  for (const auto& k : points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", k.location.x, k.location.y);
    os << buf;
  }
  if (!os) throw IoError("failed writing '" + path + "'");
}

KeypointSet assemble_candidates(const KeypointSet& detected, const KeypointSet& random) {
  KeypointSet out;
  out.reserve(detected.size() + random.size());
  out.insert(out.end(), detected.begin(), detected.end());
  out.insert(out.end(), random.begin(), random.end());
  return out;
}

}  // namespace densereg

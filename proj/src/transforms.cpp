#include "densereg/transforms.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <array>
#include <cmath>

namespace densereg {

namespace {

constexpr std::array<Monomial, 10> kBasis{{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1},
                                           {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}}};

std::size_t term_count(TransformKind kind) { return param_count(kind) / 2; }

std::size_t term_index(int xp, int yp) {
  const int d = xp + yp;
  return static_cast<std::size_t>(d * (d + 1) / 2 + yp);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Ratio of smallest to largest principal variance; zero for collinear sets.
double spread_ratio(std::span<const Point2> pts) {
  double mx = 0.0, my = 0.0;
  for (auto p : pts) mx += p.x, my += p.y;
  mx /= pts.size();
  my /= pts.size();
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (auto p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
    sxy += (p.x - mx) * (p.y - my);
  }
  const double tr = sxx + syy;
  if (tr <= 0.0) return 0.0;
  const double disc = std::sqrt(std::max(0.0, 0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy));
  const double lo = 0.5 * tr - disc;
  const double hi = 0.5 * tr + disc;
  return std::max(0.0, lo) / hi;
}

constexpr double kCollinearTol = 1e-12;

void check_point_sets(TransformKind kind, std::span<const Point2> from, std::span<const Point2> to) {
  if (from.size() != to.size()) throw ContractError("fit_transform: point list sizes differ");
  for (std::size_t i = 0; i < from.size(); ++i)
    if (!is_finite(from[i]) || !is_finite(to[i])) throw ContractError("fit_transform: non-finite point");
  const std::size_t need = min_correspondences(kind);
  // Fewer than three points cannot span the plane; report that as a count problem.
  if (from.size() < 3)
    throw InsufficientCorrespondences(std::string(to_string(kind)) + " needs at least " +
                                      std::to_string(need) + " correspondences, got " +
                                      std::to_string(from.size()));
  if (spread_ratio(from) < kCollinearTol ||
      (kind == TransformKind::homography && spread_ratio(to) < kCollinearTol))
    throw DegenerateConfiguration(std::string(to_string(kind)) + ": collinear point configuration");
  if (from.size() < need)
    throw InsufficientCorrespondences(std::string(to_string(kind)) + " needs at least " +
                                      std::to_string(need) + " correspondences, got " +
                                      std::to_string(from.size()));
}

Transform fit_polynomial(TransformKind kind, std::span<const Point2> from, std::span<const Point2> to) {
  const std::size_t terms = term_count(kind);
  const auto n = static_cast<Eigen::Index>(from.size());

  double xmin = from[0].x, xmax = from[0].x, ymin = from[0].y, ymax = from[0].y;
  for (auto p : from) {
    xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
  }
  const double cx = 0.5 * (xmin + xmax);
  const double cy = 0.5 * (ymin + ymax);
  const double half = 0.5 * std::max(xmax - xmin, ymax - ymin);

  Eigen::MatrixXd a(n, static_cast<Eigen::Index>(terms));
  Eigen::MatrixXd b(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (from[i].x - cx) / half;
    const double v = (from[i].y - cy) / half;
    for (std::size_t t = 0; t < terms; ++t)
      a(i, static_cast<Eigen::Index>(t)) = std::pow(u, kBasis[t].x_power) * std::pow(v, kBasis[t].y_power);
    b(i, 0) = to[i].x;
    b(i, 1) = to[i].y;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(terms))
    throw DegenerateConfiguration(std::string(to_string(kind)) + ": rank-deficient design matrix");
  const Eigen::MatrixXd coef = qr.solve(b);

  // Expand c * ((x - cx)/half)^i ((y - cy)/half)^j into raw monomials.
  Transform t = Transform::identity(kind);
  std::fill(t.params.begin(), t.params.end(), 0.0);
  for (std::size_t term = 0; term < terms; ++term) {
    const int i = kBasis[term].x_power;
    const int j = kBasis[term].y_power;
    const double norm = std::pow(half, -(i + j));
    for (int ax = 0; ax <= i; ++ax)
      for (int by = 0; by <= j; ++by) {
        const double w = norm * binomial(i, ax) * std::pow(-cx, i - ax) * binomial(j, by) * std::pow(-cy, j - by);
        const std::size_t dst = term_index(ax, by);
        t.params[dst] += w * coef(static_cast<Eigen::Index>(term), 0);
        t.params[terms + dst] += w * coef(static_cast<Eigen::Index>(term), 1);
      }
  }
  return t;
}

// Similarity taking the centroid to the origin and the mean distance to sqrt(2).
Eigen::Matrix3d hartley_normalizer(std::span<const Point2> pts) {
  double mx = 0.0, my = 0.0;
  for (auto p : pts) mx += p.x, my += p.y;
  mx /= pts.size();
  my /= pts.size();
  double mean_dist = 0.0;
  for (auto p : pts) mean_dist += std::hypot(p.x - mx, p.y - my);
  mean_dist /= pts.size();
  if (mean_dist <= 0.0) throw DegenerateConfiguration("homography: coincident points");
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * mx, 0, s, -s * my, 0, 0, 1;
  return t;
}

Transform fit_homography(std::span<const Point2> from, std::span<const Point2> to) {
  const Eigen::Matrix3d tf = hartley_normalizer(from);
  const Eigen::Matrix3d tt = hartley_normalizer(to);
  const auto n = static_cast<Eigen::Index>(from.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = tf * Eigen::Vector3d(from[i].x, from[i].y, 1.0);
    const Eigen::Vector3d q = tt * Eigen::Vector3d(to[i].x, to[i].y, 1.0);
    const double x = p.x(), y = p.y(), u = q.x(), v = q.y();
    a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A unique solution needs an eight-dimensional row space.
  if (sv.size() < 8 || sv(7) <= 1e-9 * sv(0))
    throw DegenerateConfiguration("homography: null space is not one-dimensional");
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d hm = tt.inverse() * hn * tf;
  if (std::abs(hm(2, 2)) < 1e-12 * hm.norm())
    throw DegenerateConfiguration("homography: h33 vanishes");
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out[3 * r + c] = hm(r, c);
  return Transform::from_homography(out);
}

double eval_poly(std::span<const double> coef, double x, double y) {
  const double x2 = x * x, y2 = y * y, xy = x * y;
  const std::array<double, 10> m{1.0, x, y, x2, xy, y2, x2 * x, x2 * y, x * y2, y2 * y};
  double acc = 0.0;
  for (std::size_t i = 0; i < coef.size(); ++i) acc += coef[i] * m[i];
  return acc;
}

}  // namespace

std::span<const Monomial> monomial_basis(TransformKind kind) {
  if (kind == TransformKind::homography) return {};
  return std::span<const Monomial>(kBasis.data(), term_count(kind));
}

Transform fit_transform(TransformKind kind, std::span<const Point2> from, std::span<const Point2> to) {
  check_point_sets(kind, from, to);
  return kind == TransformKind::homography ? fit_homography(from, to) : fit_polynomial(kind, from, to);
}

Transform fit_transform(TransformKind kind, std::span<const Correspondence> corrs) {
  std::vector<Point2> from, to;
  for (const auto& c : corrs)
    if (c.active()) {
      from.push_back(c.fixed_pt);
      to.push_back(c.moving_pt);
    }
  return fit_transform(kind, from, to);
}

std::optional<Point2> try_apply(const Transform& t, Point2 p) {
  if (t.kind == TransformKind::homography) {
    const auto& h = t.params;
    const double w = h[6] * p.x + h[7] * p.y + h[8];
    if (std::abs(w) <= 1e-12) return std::nullopt;
    return Point2{(h[0] * p.x + h[1] * p.y + h[2]) / w, (h[3] * p.x + h[4] * p.y + h[5]) / w};
  }
  const std::size_t terms = term_count(t.kind);
  const std::span<const double> params(t.params);
  return Point2{eval_poly(params.subspan(0, terms), p.x, p.y), eval_poly(params.subspan(terms, terms), p.x, p.y)};
}

Point2 apply_transform(const Transform& t, Point2 p) {
  if (t.params.size() != param_count(t.kind)) throw ContractError("apply_transform: malformed transform");
  const auto q = try_apply(t, p);
  if (!q) throw PointAtInfinity("homography maps point to infinity");
  return *q;
}

std::vector<Point2> apply_transform(const Transform& t, std::span<const Point2> pts) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (auto p : pts) out.push_back(apply_transform(t, p));
  return out;
}

Point2 apply_chain(const TransformChain& chain, Point2 p) {
  for (const auto& t : chain.stages()) p = apply_transform(t, p);
  return p;
}

std::optional<Point2> try_apply_chain(const TransformChain& chain, Point2 p) {
  for (const auto& t : chain.stages()) {
    const auto q = try_apply(t, p);
    if (!q) return std::nullopt;
    p = *q;
  }
  return p;
}

TransformChain compose(const TransformChain& outer, const TransformChain& inner) {
  std::vector<Transform> stages = inner.stages();
  stages.insert(stages.end(), outer.stages().begin(), outer.stages().end());
  return TransformChain(std::move(stages));
}

Transform compose_affine(const Transform& outer, const Transform& inner) {
  if (outer.kind != TransformKind::affine || inner.kind != TransformKind::affine)
    throw ContractError("compose_affine: both transforms must be affine");
  const auto& o = outer.params;
  const auto& i = inner.params;
  Transform t = Transform::identity(TransformKind::affine, inner.domain, outer.range);
  // x' = o0 + o1*x + o2*y with (x, y) = inner(p).
  t.params[0] = o[0] + o[1] * i[0] + o[2] * i[3];
  t.params[1] = o[1] * i[1] + o[2] * i[4];
  t.params[2] = o[1] * i[2] + o[2] * i[5];
  t.params[3] = o[3] + o[4] * i[0] + o[5] * i[3];
  t.params[4] = o[4] * i[1] + o[5] * i[4];
  t.params[5] = o[4] * i[2] + o[5] * i[5];
  return t;
}

Transform rescale_transform(const Transform& t, Extent new_domain, Extent new_range) {
  if (!t.domain.valid() || !t.range.valid() || !new_domain.valid() || !new_range.valid())
    throw ContractError("rescale_transform: frames must have positive extents");
  const double ax = t.domain.width / new_domain.width;
  const double ay = t.domain.height / new_domain.height;
  const double rx = new_range.width / t.range.width;
  const double ry = new_range.height / t.range.height;
  Transform out = t;
  out.domain = new_domain;
  out.range = new_range;
  if (t.kind == TransformKind::homography) {
    const std::array<double, 3> col{ax, ay, 1.0};
    const std::array<double, 3> row{rx, ry, 1.0};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out.params[3 * r + c] = row[r] * t.params[3 * r + c] * col[c];
    return out;
  }
  const std::size_t terms = term_count(t.kind);
  for (std::size_t k = 0; k < terms; ++k) {
    const double s = std::pow(ax, kBasis[k].x_power) * std::pow(ay, kBasis[k].y_power);
    out.params[k] = rx * s * t.params[k];
    out.params[terms + k] = ry * s * t.params[terms + k];
  }
  return out;
}

}  // namespace densereg

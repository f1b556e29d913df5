#include "gaucho/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace gaucho {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double extent_squared(std::span<const Point> pts) {
  Eigen::AlignedBox2d box;
  for (const auto& p : pts) box.extend(p);
  return box.sizes().squaredNorm();
}

}  // namespace

double signed_area(std::span<const Point> v) {
  const std::size_t n = v.size();
  if (n < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += cross(v[i], v[(i + 1) % n]);
  return 0.5 * s;
}

ConvexPoly ConvexPoly::from_vertices(std::vector<Point> v) {
  if (v.size() < 3) throw DomainError("convex polygon needs at least 3 vertices");
  for (const auto& p : v)
    if (!p.allFinite()) throw InvalidInput("convex polygon has non-finite vertices");
  const double area = signed_area(v);
  const double tol = 1e-9 * extent_squared(v);
  if (!(std::abs(area) > tol)) throw DomainError("convex polygon is degenerate (zero area)");
  if (area < 0) std::reverse(v.begin(), v.end());
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % n];
    const Point& c = v[(i + 2) % n];
    if (!(cross(b - a, c - b) > tol)) throw DomainError("polygon is not strictly convex");
  }
  return ConvexPoly(std::move(v));
}

double ConvexPoly::area() const { return signed_area(vertices_); }

std::array<Point, 4> obb_corners(const ObbLed& obb) {
  const Point u = 0.5 * obb.w() * Point(std::cos(obb.theta()), std::sin(obb.theta()));
  const Point v = 0.5 * obb.h() * Point(-std::sin(obb.theta()), std::cos(obb.theta()));
  const Point c = obb.center();
  return {c + u + v, c - u + v, c - u - v, c + u - v};
}

ConvexPoly obb_polygon(const ObbLed& obb) {
  const auto corners = obb_corners(obb);
  return ConvexPoly::from_vertices({corners.begin(), corners.end()});
}

Polygon clip_convex(const ConvexPoly& subject, const ConvexPoly& clipper) {
  Polygon output = subject.vertices();
  const auto& clip = clipper.vertices();
  for (std::size_t i = 0; i < clip.size() && !output.empty(); ++i) {
    const Point a = clip[i];
    const Point edge = clip[(i + 1) % clip.size()] - a;
    Polygon input;
    input.swap(output);
    for (std::size_t j = 0; j < input.size(); ++j) {
      const Point& cur = input[j];
      const Point& prev = input[(j + input.size() - 1) % input.size()];
      const double s_cur = cross(edge, cur - a);
      const double s_prev = cross(edge, prev - a);
      if (s_cur >= 0) {
        if (s_prev < 0) output.push_back(prev + (cur - prev) * (s_prev / (s_prev - s_cur)));
        output.push_back(cur);
      } else if (s_prev >= 0) {
        output.push_back(prev + (cur - prev) * (s_prev / (s_prev - s_cur)));
      }
    }
  }
  return output;
}

double convex_iou(const ConvexPoly& x, const ConvexPoly& y) {
  const double ax = x.area(), ay = y.area();
  const double inter = std::abs(signed_area(clip_convex(x, y)));
  const double uni = ax + ay - inter;
  if (!(uni > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double obb_iou(const ObbLed& x, const ObbLed& y) {
  if (x == y) return 1.0;
  const double rx = 0.5 * std::hypot(x.w(), x.h());
  const double ry = 0.5 * std::hypot(y.w(), y.h());
  if ((x.center() - y.center()).norm() >= rx + ry) return 0.0;
  return convex_iou(obb_polygon(x), obb_polygon(y));
}

// ---------------------------------------------------------------------------
// Ellipse intersection

namespace {

struct EllipseRows {
  Point c;
  double p, q, det;  // implicit form p x^2 + 2 q x y + r y^2 <= 1, det = p r - q^2
  double half_height;
  double half_width;

  explicit EllipseRows(const OrientedEllipsed& e) : c(e.center()) {
    const double cs = std::cos(e.theta()), sn = std::sin(e.theta());
    const double i1 = 1.0 / (e.r1() * e.r1()), i2 = 1.0 / (e.r2() * e.r2());
    p = cs * cs * i1 + sn * sn * i2;
    q = cs * sn * (i1 - i2);
    det = i1 * i2;
    half_height = std::sqrt(e.r1() * e.r1() * sn * sn + e.r2() * e.r2() * cs * cs);
    half_width = std::sqrt(e.r1() * e.r1() * cs * cs + e.r2() * e.r2() * sn * sn);
  }

  double y_lo() const { return c.y() - half_height; }
  double y_hi() const { return c.y() + half_height; }

  // Chord [lo, hi] at height y; degenerates to a point at the extremes.
  std::pair<double, double> chord(double y) const {
    const double dy = y - c.y();
    const double disc = std::max(p - dy * dy * det, 0.0);
    const double mid = c.x() - q * dy / p;
    const double half = std::sqrt(disc) / p;
    return {mid - half, mid + half};
  }
};

struct OverlapWidth {
  const EllipseRows& e1;
  const EllipseRows& e2;

  double operator()(double y) const {
    const auto [l1, h1] = e1.chord(y);
    const auto [l2, h2] = e2.chord(y);
    return std::min(h1, h2) - std::max(l1, l2);
  }
};

template <typename F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace

double ellipse_intersection_area(const OrientedEllipsed& x, const OrientedEllipsed& y, double tol) {
  if (!(tol > 0)) throw InvalidInput("ellipse tolerance must be positive");
  if (x == y) return x.area();
  const EllipseRows e1(x), e2(y);
  const double ylo = std::max(e1.y_lo(), e2.y_lo());
  const double yhi = std::min(e1.y_hi(), e2.y_hi());
  if (!(yhi > ylo)) return 0.0;
  if (std::abs(x.cx() - y.cx()) >= e1.half_width + e2.half_width) return 0.0;
  const OverlapWidth width{e1, e2};

  // The overlap width is concave in y: locate its peak, then its support.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = ylo, b = yhi;
  double m1 = b - kInvPhi * (b - a), m2 = a + kInvPhi * (b - a);
  double f1 = width(m1), f2 = width(m2);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * (std::abs(a) + std::abs(b) + 1.0); ++it) {
    if (f1 < f2) {
      a = m1;
      m1 = m2;
      f1 = f2;
      m2 = a + kInvPhi * (b - a);
      f2 = width(m2);
    } else {
      b = m2;
      m2 = m1;
      f2 = f1;
      m1 = b - kInvPhi * (b - a);
      f1 = width(m1);
    }
  }
  const double y_peak = f1 > f2 ? m1 : m2;
  const double w_peak = std::max(f1, f2);
  const double scale = std::max(e1.half_width, e2.half_width);
  if (!(w_peak > 1e-14 * scale)) return 0.0;

  auto support_end = [&](double outside, double inside) {
    if (width(outside) > 0) return outside;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (outside + inside);
      if (mid == outside || mid == inside) break;
      (width(mid) > 0 ? inside : outside) = mid;
    }
    return 0.5 * (outside + inside);
  };
  const double ya = support_end(ylo, y_peak);
  const double yb = support_end(yhi, y_peak);
  const double span = yb - ya;
  if (!(span > 0)) return 0.0;

  // y = ya + span (1 - cos t) / 2 removes square-root behaviour at the ends.
  auto integrand = [&](double t) {
    const double yy = ya + 0.5 * span * (1.0 - std::cos(t));
    return std::max(width(yy), 0.0) * 0.5 * span * std::sin(t);
  };
  constexpr int kPanels = 16;
  const double h = kPi<double> / kPanels;
  std::array<double, 2 * kPanels + 1> samples{};
  for (int i = 0; i <= 2 * kPanels; ++i) samples[static_cast<std::size_t>(i)] = integrand(0.5 * h * i);
  double coarse = 0.0;
  for (int k = 0; k < kPanels; ++k)
    coarse += h / 6.0 * (samples[2 * k] + 4.0 * samples[2 * k + 1] + samples[2 * k + 2]);
  const double eps = 0.25 * tol * std::max(coarse, 1e-3 * std::min(x.area(), y.area())) / kPanels;
  double total = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double t0 = h * k, t1 = h * (k + 1);
    const double fa = samples[2 * k], fm = samples[2 * k + 1], fb = samples[2 * k + 2];
    const double whole = h / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_step(integrand, t0, t1, fa, fm, fb, whole, eps, 40);
  }
  return std::clamp(total, 0.0, std::min(x.area(), y.area()));
}

double ellipse_iou(const OrientedEllipsed& x, const OrientedEllipsed& y, double tol) {
  if (x == y) return 1.0;
  const double inter = ellipse_intersection_area(x, y, tol);
  const double uni = x.area() + y.area() - inter;
  if (!(uni > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Rasterization

void RasterGrid::validate() const {
  if (resolution < 64) throw InvalidInput("raster grid resolution must be at least 64");
  if (window.isEmpty() || !(window.sizes().minCoeff() > 0))
    throw InvalidInput("raster grid window must have positive extent");
}

RasterGrid RasterGrid::covering(int resolution, std::span<const Point> points) {
  Eigen::AlignedBox2d box;
  for (const auto& p : points) box.extend(p);
  if (box.isEmpty()) throw InvalidInput("raster grid needs at least one point");
  Point size = box.sizes();
  const double fallback = std::max(size.maxCoeff(), 1.0);
  for (int k = 0; k < 2; ++k)
    if (!(size[k] > 0)) size[k] = fallback;
  const Point pad = size / std::max(resolution, 1);
  const Point mid = box.center();
  RasterGrid g;
  g.resolution = resolution;
  g.window = Eigen::AlignedBox2d(mid - 0.5 * size - pad, mid + 0.5 * size + pad);
  return g;
}

namespace {

using Interval = std::pair<double, double>;

void polygon_row(std::span<const Point> poly, double y, std::vector<double>& xs,
                 std::vector<Interval>& out) {
  xs.clear();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    if ((p.y() <= y && y < q.y()) || (q.y() <= y && y < p.y()))
      xs.push_back(p.x() + (y - p.y()) * (q.x() - p.x()) / (q.y() - p.y()));
  }
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 0; i + 1 < xs.size(); i += 2) out.emplace_back(xs[i], xs[i + 1]);
}

void shape_row(const MaskShape& shape, double y, std::vector<double>& xs, std::vector<Interval>& out) {
  if (const auto* obb = std::get_if<ObbLed>(&shape)) {
    const auto corners = obb_corners(*obb);
    polygon_row(corners, y, xs, out);
    return;
  }
  const EllipseRows rows(std::get<OrientedEllipsed>(shape));
  if (y < rows.y_lo() || y > rows.y_hi()) return;
  out.push_back(rows.chord(y));
}

std::vector<Point> shape_extent_points(const MaskShape& shape) {
  if (const auto* obb = std::get_if<ObbLed>(&shape)) {
    const auto c = obb_corners(*obb);
    return {c.begin(), c.end()};
  }
  const EllipseRows rows(std::get<OrientedEllipsed>(shape));
  return {rows.c - Point(rows.half_width, rows.half_height), rows.c + Point(rows.half_width, rows.half_height)};
}

void check_mask(std::span<const Polygon> mask) {
  for (const auto& poly : mask) {
    for (const auto& p : poly)
      if (!p.allFinite()) throw InvalidInput("mask polygon has non-finite vertices");
    if (poly.size() >= 3 && std::abs(signed_area(poly)) > 0) return;
  }
  throw DomainError("mask is empty");
}

}  // namespace

double shape_mask_iou(const MaskShape& shape, std::span<const Polygon> mask, const RasterGrid& grid) {
  grid.validate();
  check_mask(mask);
  const int n = grid.resolution;
  const Point lo = grid.window.min();
  const double dx = grid.window.sizes().x() / n;
  const double dy = grid.window.sizes().y() / n;

  std::vector<unsigned char> in_mask(static_cast<std::size_t>(n));
  std::vector<unsigned char> in_shape(static_cast<std::size_t>(n));
  std::vector<double> xs;
  std::vector<Interval> intervals;
  auto fill = [&](std::vector<unsigned char>& row) {
    for (const auto& [l, h] : intervals) {
      const auto first = static_cast<long long>(std::ceil((l - lo.x()) / dx - 0.5));
      const auto last = static_cast<long long>(std::floor((h - lo.x()) / dx - 0.5));
      for (long long i = std::max(first, 0LL); i <= std::min(last, static_cast<long long>(n) - 1); ++i)
        row[static_cast<std::size_t>(i)] = 1;
    }
  };

  long long both = 0, either = 0;
  for (int j = 0; j < n; ++j) {
    const double y = lo.y() + (j + 0.5) * dy;
    std::fill(in_mask.begin(), in_mask.end(), 0);
    std::fill(in_shape.begin(), in_shape.end(), 0);
    for (const auto& poly : mask) {
      intervals.clear();
      polygon_row(poly, y, xs, intervals);
      fill(in_mask);
    }
    intervals.clear();
    shape_row(shape, y, xs, intervals);
    fill(in_shape);
    for (int i = 0; i < n; ++i) {
      both += in_mask[static_cast<std::size_t>(i)] & in_shape[static_cast<std::size_t>(i)];
      either += in_mask[static_cast<std::size_t>(i)] | in_shape[static_cast<std::size_t>(i)];
    }
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
}

double shape_mask_iou(const MaskShape& shape, std::span<const Polygon> mask, int resolution) {
  check_mask(mask);
  std::vector<Point> pts = shape_extent_points(shape);
  for (const auto& poly : mask) pts.insert(pts.end(), poly.begin(), poly.end());
  return shape_mask_iou(shape, mask, RasterGrid::covering(resolution, pts));
}

// ---------------------------------------------------------------------------
// Hull and enclosing rectangle

std::vector<Point> convex_hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  for (const auto& p : pts)
    if (!p.allFinite()) throw InvalidInput("convex_hull: non-finite point");
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

ObbLed min_area_rect(std::span<const Point> points) {
  if (points.size() < 3) throw DomainError("min_area_rect needs at least 3 points");
  const auto hull = convex_hull(points);
  if (hull.size() < 3 || !(std::abs(signed_area(hull)) > 1e-12 * extent_squared(hull)))
    throw DomainError("min_area_rect: points are collinear");

  double best_area = std::numeric_limits<double>::infinity();
  ObbLed best = ObbLed::canonical(0, 0, 1, 1, 0);
  const std::size_t n = hull.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point e = (hull[(i + 1) % n] - hull[i]).normalized();
    const Point nrm(-e.y(), e.x());
    double emin = std::numeric_limits<double>::infinity(), emax = -emin;
    double nmin = emin, nmax = -emin;
    for (const auto& p : hull) {
      const double pe = p.dot(e), pn = p.dot(nrm);
      emin = std::min(emin, pe);
      emax = std::max(emax, pe);
      nmin = std::min(nmin, pn);
      nmax = std::max(nmax, pn);
    }
    const double area = (emax - emin) * (nmax - nmin);
    if (area < best_area * (1.0 - 1e-12)) {
      best_area = area;
      const Point c = 0.5 * (emin + emax) * e + 0.5 * (nmin + nmax) * nrm;
      best = ObbLed::canonical(c.x(), c.y(), emax - emin, nmax - nmin, std::atan2(e.y(), e.x()));
    }
  }
  return best;
}

}  // namespace gaucho

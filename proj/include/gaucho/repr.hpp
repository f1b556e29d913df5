// Conversions among oriented boxes, Gaussians, Cholesky factors and
// oriented ellipses, plus the Cholesky parameter bounds.
#ifndef GAUCHO_REPR_HPP
#define GAUCHO_REPR_HPP

#include "gaucho/core.hpp"

#include <algorithm>
#include <cmath>

namespace gaucho {

/// Covariance of a box with dimensions (w, h) rotated by theta, with no
/// canonicalization of the shape. lambda_w = s*w^2, lambda_h = s*h^2.
template <typename Scalar>
Gaussian2<Scalar> gaussian_from_shape(const Vec2<Scalar>& center, Scalar w, Scalar h, Scalar theta,
                                      const ConversionConfig<Scalar>& cfg = {}) {
  cfg.validate();
  if (!detail::all_finite({center.x(), center.y(), w, h, theta}))
    throw InvalidInput("gaussian_from_shape: non-finite input");
  const Scalar lw = cfg.s * w * w;
  const Scalar lh = cfg.s * h * h;
  const Scalar cs = std::cos(theta), sn = std::sin(theta);
  Gaussian2<Scalar> g;
  g.mu = center;
  g.a = lw * cs * cs + lh * sn * sn;
  g.b = lw * sn * sn + lh * cs * cs;
  g.c = Scalar(0.5) * (lw - lh) * std::sin(2 * theta);
  return g;
}

template <typename Scalar>
Gaussian2<Scalar> obb_to_gaussian(const ObbLe<Scalar>& obb, const ConversionConfig<Scalar>& cfg = {}) {
  if (obb.ambiguous_angle() && obb.w() == obb.h()) {
    // Isotropic: c vanishes for every orientation.
    cfg.validate();
    const Scalar lambda = cfg.s * obb.w() * obb.w();
    return {obb.center(), lambda, lambda, Scalar(0)};
  }
  return gaussian_from_shape(obb.center(), obb.w(), obb.h(), obb.theta(), cfg);
}

template <typename Scalar>
GauchoParams<Scalar> gaussian_to_cholesky(const Gaussian2<Scalar>& g) {
  if (!detail::all_finite({g.mu.x(), g.mu.y(), g.a, g.b, g.c}) || !(g.a > 0))
    throw DomainError("gaussian_to_cholesky: covariance is not positive-definite");
  const Scalar alpha = std::sqrt(g.a);
  const Scalar gamma = g.c / alpha;
  const Scalar beta2 = g.b - gamma * gamma;
  if (!(beta2 > 0)) throw DomainError("gaussian_to_cholesky: covariance is not positive-definite");
  return {g.mu.x(), g.mu.y(), alpha, std::sqrt(beta2), gamma};
}

template <typename Scalar>
Gaussian2<Scalar> cholesky_to_gaussian(const GauchoParams<Scalar>& p) {
  if (!detail::all_finite({p.cx, p.cy, p.alpha, p.beta, p.gamma}))
    throw InvalidInput("cholesky_to_gaussian: non-finite parameters");
  if (!(p.alpha > 0) || !(p.beta > 0))
    throw InvalidInput("cholesky_to_gaussian: alpha and beta must be positive");
  return {p.center(), p.alpha * p.alpha, p.beta * p.beta + p.gamma * p.gamma, p.alpha * p.gamma};
}

/// Closed-form eigen-structure of a 2x2 symmetric positive-definite matrix.
template <typename Scalar>
struct EigenFrame {
  Scalar lambda_max, lambda_min;
  Scalar theta;  // orientation of the major eigenvector, in [-pi/2, pi/2)
  bool isotropic;
};

template <typename Scalar>
EigenFrame<Scalar> eigen_frame(const Gaussian2<Scalar>& g, const ConversionConfig<Scalar>& cfg = {}) {
  require_positive_definite(g);
  const Scalar half_sum = Scalar(0.5) * (g.a + g.b);
  const Scalar radius = std::hypot(Scalar(0.5) * (g.a - g.b), g.c);
  EigenFrame<Scalar> f;
  f.lambda_max = half_sum + radius;
  f.lambda_min = half_sum - radius;
  if (!(f.lambda_min > 0)) throw DomainError("eigen_frame: covariance is not positive-definite");
  f.isotropic = (f.lambda_max - f.lambda_min) / f.lambda_max < cfg.iso_tol;
  f.theta = f.isotropic ? Scalar(0) : wrap_half_turn(Scalar(0.5) * std::atan2(2 * g.c, g.a - g.b));
  return f;
}

template <typename Scalar>
ObbLe<Scalar> gaussian_to_obb(const Gaussian2<Scalar>& g, const ConversionConfig<Scalar>& cfg = {}) {
  cfg.validate();
  const auto f = eigen_frame(g, cfg);
  const Scalar w = std::sqrt(f.lambda_max / cfg.s);
  const Scalar h = std::sqrt(f.lambda_min / cfg.s);
  if (f.isotropic) return ObbLe<Scalar>::unoriented(g.mu.x(), g.mu.y(), w, h);
  return ObbLe<Scalar>::canonical(g.mu.x(), g.mu.y(), w, h, f.theta);
}

template <typename Scalar>
OrientedEllipse<Scalar> gaussian_to_ellipse(const Gaussian2<Scalar>& g,
                                            const ConversionConfig<Scalar>& cfg = {}) {
  cfg.validate();
  const auto f = eigen_frame(g, cfg);
  const Scalar r1 = Scalar(0.5) * std::sqrt(f.lambda_max / cfg.s);
  const Scalar r2 = Scalar(0.5) * std::sqrt(f.lambda_min / cfg.s);
  if (f.isotropic) return OrientedEllipse<Scalar>::circle_like(g.mu.x(), g.mu.y(), r1, r2);
  return OrientedEllipse<Scalar>::canonical(g.mu.x(), g.mu.y(), r1, r2, f.theta);
}

/// Inverse of gaussian_to_ellipse: semi-axes are half the box dimensions.
template <typename Scalar>
Gaussian2<Scalar> ellipse_to_gaussian(const OrientedEllipse<Scalar>& e,
                                      const ConversionConfig<Scalar>& cfg = {}) {
  if (e.ambiguous_angle() && e.r1() == e.r2()) {
    cfg.validate();
    const Scalar lambda = cfg.s * 4 * e.r1() * e.r1();
    return {e.center(), lambda, lambda, Scalar(0)};
  }
  return gaussian_from_shape(e.center(), 2 * e.r1(), 2 * e.r2(), e.theta(), cfg);
}

/// The ellipse inscribed in a box, sharing its orientation.
template <typename Scalar>
OrientedEllipse<Scalar> obb_to_ellipse(const ObbLe<Scalar>& obb) {
  if (obb.ambiguous_angle())
    return OrientedEllipse<Scalar>::circle_like(obb.cx(), obb.cy(), obb.w() / 2, obb.h() / 2);
  return OrientedEllipse<Scalar>::canonical(obb.cx(), obb.cy(), obb.w() / 2, obb.h() / 2, obb.theta());
}

template <typename Scalar>
ObbLe<Scalar> ellipse_to_obb(const OrientedEllipse<Scalar>& e) {
  if (e.ambiguous_angle())
    return ObbLe<Scalar>::unoriented(e.cx(), e.cy(), 2 * e.r1(), 2 * e.r2());
  return ObbLe<Scalar>::canonical(e.cx(), e.cy(), 2 * e.r1(), 2 * e.r2(), e.theta());
}

template <typename Scalar>
GauchoParams<Scalar> obb_to_gaucho(const ObbLe<Scalar>& obb, const ConversionConfig<Scalar>& cfg = {}) {
  return gaussian_to_cholesky(obb_to_gaussian(obb, cfg));
}

template <typename Scalar>
ObbLe<Scalar> gaucho_to_obb(const GauchoParams<Scalar>& p, const ConversionConfig<Scalar>& cfg = {}) {
  return gaussian_to_obb(cholesky_to_gaussian(p), cfg);
}

/// Bounds on (alpha, beta, gamma) for a box of dimensions (w, h). |gamma|
/// reaches gamma_max at theta = theta_star, where theta is measured along w.
template <typename Scalar>
CholeskyBounds<Scalar> cholesky_bounds(Scalar w, Scalar h, const ConversionConfig<Scalar>& cfg = {}) {
  cfg.validate();
  if (!(w > 0) || !(h > 0) || !std::isfinite(w) || !std::isfinite(h))
    throw InvalidInput("cholesky_bounds: dimensions must be positive and finite");
  const Scalar root_s = std::sqrt(cfg.s);
  CholeskyBounds<Scalar> bounds;
  bounds.lo_diag = root_s * std::min(w, h);
  bounds.hi_diag = root_s * std::max(w, h);
  bounds.gamma_max = bounds.hi_diag - bounds.lo_diag;
  if (w != h) {
    // Critical point of gamma^2 as a function of x = cos(2 theta):
    // (lh + lw - 2 sqrt(lh lw)) / (lh - lw), with the common factor cancelled.
    const Scalar x_star = (h - w) / (h + w);
    bounds.theta_star = Scalar(0.5) * std::acos(std::clamp(x_star, Scalar(-1), Scalar(1)));
    bounds.theta_star_defined = true;
  }
  return bounds;
}

template <typename Scalar>
Vec2<Scalar> rotate_point(const Vec2<Scalar>& p, Scalar phi, const Vec2<Scalar>& pivot) {
  return pivot + rotation(phi) * (p - pivot);
}

template <typename Scalar>
ObbLe<Scalar> rotate_obb(const ObbLe<Scalar>& obb, Scalar phi,
                         const Vec2<Scalar>& pivot = Vec2<Scalar>::Zero()) {
  const Vec2<Scalar> c = rotate_point(obb.center(), phi, pivot);
  if (obb.ambiguous_angle()) return ObbLe<Scalar>::unoriented(c.x(), c.y(), obb.w(), obb.h());
  return ObbLe<Scalar>::canonical(c.x(), c.y(), obb.w(), obb.h(), obb.theta() + phi);
}

/// Rotates the mean about pivot and conjugates the covariance: C' = R C R^T.
template <typename Scalar>
Gaussian2<Scalar> rotate_gaussian(const Gaussian2<Scalar>& g, Scalar phi,
                                  const Vec2<Scalar>& pivot = Vec2<Scalar>::Zero()) {
  const Mat2<Scalar> r = rotation(phi);
  const Mat2<Scalar> cov = r * g.covariance() * r.transpose();
  return Gaussian2<Scalar>::from_covariance(pivot + r * (g.mu - pivot), cov);
}

}  // namespace gaucho

#endif  // GAUCHO_REPR_HPP

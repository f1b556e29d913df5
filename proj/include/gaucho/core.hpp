// Value types shared by every gaucho module: oriented boxes in long-edge
// form, 2D Gaussians, Cholesky (GauCho) parameters and oriented ellipses.
//
// All types are templated on the scalar so the same code serves float
// training pipelines and double-precision evaluation. Angles are radians.
#ifndef GAUCHO_CORE_HPP
#define GAUCHO_CORE_HPP

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gaucho {

/// Raised for non-finite or structurally invalid arguments.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an argument leaves the domain of an operation (non-PD
/// covariance, degenerate polygon, empty ground truth).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a network offset would overflow an exponential channel.
class OffsetOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar>
inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
template <typename Scalar>
inline constexpr Scalar kHalfPi = std::numbers::pi_v<Scalar> / 2;

template <typename Scalar>
constexpr Scalar deg_to_rad(Scalar deg) {
  return deg * (kPi<Scalar> / Scalar(180));
}

template <typename Scalar>
constexpr Scalar rad_to_deg(Scalar rad) {
  return rad * (Scalar(180) / kPi<Scalar>);
}

/// Maps any angle onto the long-edge domain [-pi/2, pi/2).
template <typename Scalar>
Scalar wrap_half_turn(Scalar theta) {
  Scalar r = theta - kPi<Scalar> * std::floor((theta + kHalfPi<Scalar>) / kPi<Scalar>);
  if (r >= kHalfPi<Scalar>) r -= kPi<Scalar>;
  if (r < -kHalfPi<Scalar>) r += kPi<Scalar>;
  return r;
}

/// Distance between two axis orientations modulo pi, in [0, pi/2].
template <typename Scalar>
Scalar axial_angle_distance(Scalar t1, Scalar t2) {
  Scalar d = std::fmod(std::abs(t1 - t2), kPi<Scalar>);
  return d > kHalfPi<Scalar> ? kPi<Scalar> - d : d;
}

template <typename Scalar>
Mat2<Scalar> rotation(Scalar phi) {
  const Scalar c = std::cos(phi), s = std::sin(phi);
  Mat2<Scalar> r;
  r << c, -s, s, c;
  return r;
}

namespace detail {
template <typename Scalar>
bool all_finite(std::initializer_list<Scalar> xs) {
  for (Scalar x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}
}  // namespace detail

/// Scaling between box dimensions and Gaussian eigenvalues (lambda = s*dim^2).
template <typename Scalar>
struct ConversionConfig {
  Scalar s = Scalar(0.25);
  /// Relative eigen-gap below which a Gaussian is treated as isotropic.
  Scalar iso_tol = Scalar(1e-9);

  void validate() const {
    if (!(s > 0) || !std::isfinite(s))
      throw InvalidInput("conversion scaling factor s must be positive and finite");
    if (!(iso_tol >= 0)) throw InvalidInput("iso_tol must be non-negative");
  }
};

/// Oriented bounding box in long-edge form: w >= h > 0, theta in [-pi/2, pi/2)
/// measured along the long edge. Squares carry ambiguous_angle and theta == 0.
template <typename Scalar>
class ObbLe {
 public:
  /// Canonicalizes any (w, h, theta) into long-edge form.
  static ObbLe canonical(Scalar cx, Scalar cy, Scalar w, Scalar h, Scalar theta) {
    if (!detail::all_finite({cx, cy, w, h, theta}))
      throw InvalidInput("oriented box has non-finite parameters");
    if (!(w > 0) || !(h > 0)) throw InvalidInput("oriented box dimensions must be positive");
    if (h > w) {
      std::swap(w, h);
      theta += kHalfPi<Scalar>;
    }
    if (w == h) return ObbLe(cx, cy, w, h, Scalar(0), true);
    return ObbLe(cx, cy, w, h, wrap_half_turn(theta), false);
  }

  /// Accepts the OpenCV convention, where theta lies in [-pi/2, 0) and w is
  /// the side the angle refers to (not necessarily the longer one).
  static ObbLe from_oc(Scalar cx, Scalar cy, Scalar w, Scalar h, Scalar theta) {
    if (!(theta >= -kHalfPi<Scalar> && theta < 0))
      throw InvalidInput("OpenCV-convention angle must lie in [-pi/2, 0)");
    return canonical(cx, cy, w, h, theta);
  }

  /// A box whose orientation carries no information (decoded from an
  /// isotropic Gaussian). Requires w >= h.
  static ObbLe unoriented(Scalar cx, Scalar cy, Scalar w, Scalar h) {
    if (!detail::all_finite({cx, cy, w, h}) || !(h > 0) || !(w >= h))
      throw InvalidInput("unoriented box requires finite w >= h > 0");
    return ObbLe(cx, cy, w, h, Scalar(0), true);
  }

  Scalar cx() const { return cx_; }
  Scalar cy() const { return cy_; }
  Scalar w() const { return w_; }
  Scalar h() const { return h_; }
  Scalar theta() const { return theta_; }
  bool ambiguous_angle() const { return ambiguous_; }
  Vec2<Scalar> center() const { return {cx_, cy_}; }
  Scalar area() const { return w_ * h_; }

  friend bool operator==(const ObbLe&, const ObbLe&) = default;

 private:
  ObbLe(Scalar cx, Scalar cy, Scalar w, Scalar h, Scalar theta, bool ambiguous)
      : cx_(cx), cy_(cy), w_(w), h_(h), theta_(theta), ambiguous_(ambiguous) {}

  Scalar cx_, cy_, w_, h_, theta_;
  bool ambiguous_;
};

/// 2D Gaussian with covariance [[a, c], [c, b]].
template <typename Scalar>
struct Gaussian2 {
  Vec2<Scalar> mu = Vec2<Scalar>::Zero();
  Scalar a = 1, b = 1, c = 0;

  static Gaussian2 from_covariance(const Vec2<Scalar>& mu, const Mat2<Scalar>& cov) {
    return {mu, cov(0, 0), cov(1, 1), Scalar(0.5) * (cov(0, 1) + cov(1, 0))};
  }

  Mat2<Scalar> covariance() const {
    Mat2<Scalar> m;
    m << a, c, c, b;
    return m;
  }
  Scalar det() const { return a * b - c * c; }
  Scalar trace() const { return a + b; }

  bool is_positive_definite() const {
    return detail::all_finite({mu.x(), mu.y(), a, b, c}) && a > 0 && b > 0 && det() > 0;
  }

  friend bool operator==(const Gaussian2&, const Gaussian2&) = default;
};

template <typename Scalar>
void require_positive_definite(const Gaussian2<Scalar>& g, const char* what = "gaussian") {
  if (!g.is_positive_definite())
    throw DomainError(std::string(what) + ": covariance is not positive-definite");
}

/// Network-facing representation: center plus the lower-triangular Cholesky
/// factor L = [[alpha, 0], [gamma, beta]] of the covariance.
template <typename Scalar>
struct GauchoParams {
  Scalar cx = 0, cy = 0, alpha = 1, beta = 1, gamma = 0;

  Vec2<Scalar> center() const { return {cx, cy}; }
  Mat2<Scalar> lower() const {
    Mat2<Scalar> l;
    l << alpha, 0, gamma, beta;
    return l;
  }
  Eigen::Matrix<Scalar, 5, 1> as_vector() const {
    Eigen::Matrix<Scalar, 5, 1> v;
    v << cx, cy, alpha, beta, gamma;
    return v;
  }
  static GauchoParams from_vector(const Eigen::Matrix<Scalar, 5, 1>& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }

  friend bool operator==(const GauchoParams&, const GauchoParams&) = default;
};

/// Ellipse with semi-axes r1 >= r2 > 0; theta orients the major axis.
template <typename Scalar>
class OrientedEllipse {
 public:
  static OrientedEllipse canonical(Scalar cx, Scalar cy, Scalar r1, Scalar r2, Scalar theta) {
    if (!detail::all_finite({cx, cy, r1, r2, theta}))
      throw InvalidInput("oriented ellipse has non-finite parameters");
    if (!(r1 > 0) || !(r2 > 0)) throw InvalidInput("ellipse semi-axes must be positive");
    if (r2 > r1) {
      std::swap(r1, r2);
      theta += kHalfPi<Scalar>;
    }
    if (r1 == r2) return OrientedEllipse(cx, cy, r1, r2, Scalar(0), true);
    return OrientedEllipse(cx, cy, r1, r2, wrap_half_turn(theta), false);
  }

  static OrientedEllipse circle_like(Scalar cx, Scalar cy, Scalar r1, Scalar r2) {
    if (!detail::all_finite({cx, cy, r1, r2}) || !(r2 > 0) || !(r1 >= r2))
      throw InvalidInput("unoriented ellipse requires finite r1 >= r2 > 0");
    return OrientedEllipse(cx, cy, r1, r2, Scalar(0), true);
  }

  Scalar cx() const { return cx_; }
  Scalar cy() const { return cy_; }
  Scalar r1() const { return r1_; }
  Scalar r2() const { return r2_; }
  Scalar theta() const { return theta_; }
  bool ambiguous_angle() const { return ambiguous_; }
  Vec2<Scalar> center() const { return {cx_, cy_}; }
  Scalar area() const { return kPi<Scalar> * r1_ * r2_; }

  friend bool operator==(const OrientedEllipse&, const OrientedEllipse&) = default;

 private:
  OrientedEllipse(Scalar cx, Scalar cy, Scalar r1, Scalar r2, Scalar theta, bool ambiguous)
      : cx_(cx), cy_(cy), r1_(r1), r2_(r2), theta_(theta), ambiguous_(ambiguous) {}

  Scalar cx_, cy_, r1_, r2_, theta_;
  bool ambiguous_;
};

/// Ranges of the Cholesky entries reachable by a box of given dimensions.
template <typename Scalar>
struct CholeskyBounds {
  Scalar lo_diag = 0;    // sqrt(lambda_min)
  Scalar hi_diag = 0;    // sqrt(lambda_max)
  Scalar gamma_max = 0;  // hi_diag - lo_diag, attained at theta_star
  Scalar theta_star = 0;
  bool theta_star_defined = false;  // false for squares
};

using ObbLed = ObbLe<double>;
using Gaussian2d = Gaussian2<double>;
using GauchoParamsd = GauchoParams<double>;
using OrientedEllipsed = OrientedEllipse<double>;
using ConversionConfigd = ConversionConfig<double>;

}  // namespace gaucho

#endif  // GAUCHO_CORE_HPP

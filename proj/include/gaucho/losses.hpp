// Closed-form distances between 2D Gaussians (Wasserstein, Kullback-Leibler,
// Bhattacharyya/Hellinger), their analytic gradients with respect to GauCho
// parameters, and angular loss-landscape sweeps.
#ifndef GAUCHO_LOSSES_HPP
#define GAUCHO_LOSSES_HPP

#include "gaucho/core.hpp"
#include "gaucho/repr.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace gaucho {

enum class LossKind { kGwd, kKld, kProbIou };
enum class LossTransform { kRawDistance, kLogSaturating };
enum class KldDirection { kPredToGt, kGtToPred, kSymmetric };

template <typename Scalar>
struct LossConfig {
  LossKind kind = LossKind::kGwd;
  Scalar tau = 1;
  LossTransform transform = LossTransform::kRawDistance;
  KldDirection kld_direction = KldDirection::kPredToGt;
};

template <typename Scalar>
using Gradient5 = Eigen::Matrix<Scalar, 5, 1>;

/// Value of a distance and its partials with respect to the prediction's
/// mean and covariance entries (a, b, c treated as independent).
template <typename Scalar>
struct DistanceEval {
  Scalar value = 0;
  Vec2<Scalar> d_mu = Vec2<Scalar>::Zero();
  Scalar d_a = 0, d_b = 0, d_c = 0;

  DistanceEval scaled(Scalar k) const { return {value, k * d_mu, k * d_a, k * d_b, k * d_c}; }
};

namespace detail {

template <typename Scalar>
Mat2<Scalar> inverse2(const Mat2<Scalar>& m) {
  const Scalar det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Mat2<Scalar> inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / det;
}

// Matrix gradient G (df = tr(G dC)) to partials in (a, b, c).
template <typename Scalar>
void assign_cov_grad(DistanceEval<Scalar>& e, const Mat2<Scalar>& g) {
  e.d_a = g(0, 0);
  e.d_b = g(1, 1);
  e.d_c = g(0, 1) + g(1, 0);
}

/// Squared 2-Wasserstein distance.
template <typename Scalar>
DistanceEval<Scalar> gwd_squared_eval(const Gaussian2<Scalar>& p, const Gaussian2<Scalar>& q) {
  const Vec2<Scalar> dmu = p.mu - q.mu;
  const Scalar tr1 = p.trace(), tr2 = q.trace();
  const Scalar det1 = p.det(), det2 = q.det();
  const Scalar root_dd = std::sqrt(det1 * det2);
  const Scalar t = p.a * q.a + p.b * q.b + 2 * p.c * q.c;
  const Scalar root_q = std::sqrt(t + 2 * root_dd);
  // tr1 + tr2 - 2 sqrt(Q), rearranged so that equal covariances cancel early.
  const Scalar x = p.a * q.b + q.a * p.b - 2 * p.c * q.c;
  const Scalar numer = (tr1 - tr2) * (tr1 - tr2) + 4 * (x - 2 * root_dd);
  const Scalar noise = 16 * std::numeric_limits<Scalar>::epsilon() * (tr1 + tr2) * (tr1 + tr2);
  const Scalar cov_term = numer <= noise ? Scalar(0) : numer / (tr1 + tr2 + 2 * root_q);

  DistanceEval<Scalar> e;
  e.value = dmu.squaredNorm() + cov_term;
  e.d_mu = 2 * dmu;
  e.d_a = 1 - (q.a + p.b * det2 / root_dd) / root_q;
  e.d_b = 1 - (q.b + p.a * det2 / root_dd) / root_q;
  e.d_c = -(2 * q.c - 2 * p.c * det2 / root_dd) / root_q;
  return e;
}

/// KL(N_p || N_q) with gradient with respect to p.
template <typename Scalar>
DistanceEval<Scalar> kld_first(const Gaussian2<Scalar>& p, const Gaussian2<Scalar>& q) {
  const Mat2<Scalar> cp = p.covariance(), cq = q.covariance();
  const Mat2<Scalar> cq_inv = inverse2(cq);
  const Mat2<Scalar> cp_inv = inverse2(cp);
  const Vec2<Scalar> dmu = p.mu - q.mu;
  DistanceEval<Scalar> e;
  const Scalar raw = Scalar(0.5) * (dmu.dot(cq_inv * dmu) + (cq_inv * cp).trace() +
                                    std::log(q.det() / p.det()) - 2);
  e.value = std::max(raw, Scalar(0));
  e.d_mu = cq_inv * dmu;
  assign_cov_grad(e, Mat2<Scalar>(Scalar(0.5) * (cq_inv - cp_inv)));
  return e;
}

/// KL(N_q || N_p) with gradient with respect to p.
template <typename Scalar>
DistanceEval<Scalar> kld_second(const Gaussian2<Scalar>& p, const Gaussian2<Scalar>& q) {
  const Mat2<Scalar> cp = p.covariance(), cq = q.covariance();
  const Mat2<Scalar> cp_inv = inverse2(cp);
  const Vec2<Scalar> dmu = p.mu - q.mu;
  DistanceEval<Scalar> e;
  const Scalar raw = Scalar(0.5) * (dmu.dot(cp_inv * dmu) + (cp_inv * cq).trace() +
                                    std::log(p.det() / q.det()) - 2);
  e.value = std::max(raw, Scalar(0));
  e.d_mu = cp_inv * dmu;
  const Mat2<Scalar> outer = dmu * dmu.transpose() + cq;
  assign_cov_grad(e, Mat2<Scalar>(Scalar(0.5) * (cp_inv - cp_inv * outer * cp_inv)));
  return e;
}

template <typename Scalar>
DistanceEval<Scalar> bhattacharyya(const Gaussian2<Scalar>& p, const Gaussian2<Scalar>& q) {
  const Mat2<Scalar> sigma = Scalar(0.5) * (p.covariance() + q.covariance());
  const Mat2<Scalar> sigma_inv = inverse2(sigma);
  const Scalar det_sigma = sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(1, 0);
  const Vec2<Scalar> dmu = p.mu - q.mu;
  const Vec2<Scalar> w = sigma_inv * dmu;
  DistanceEval<Scalar> e;
  const Scalar raw = Scalar(0.125) * dmu.dot(w) +
                     Scalar(0.5) * std::log(det_sigma / std::sqrt(p.det() * q.det()));
  e.value = std::max(raw, Scalar(0));
  e.d_mu = Scalar(0.25) * w;
  assign_cov_grad(e, Mat2<Scalar>(Scalar(-1.0 / 16) * w * w.transpose() + Scalar(0.25) * sigma_inv -
                                  Scalar(0.25) * inverse2(p.covariance())));
  return e;
}

/// Maps a non-negative quantity q and its gradient through f(q), given
/// f(q) and f'(q).
template <typename Scalar>
DistanceEval<Scalar> chain(const DistanceEval<Scalar>& e, Scalar value, Scalar slope) {
  DistanceEval<Scalar> out = e.scaled(slope);
  out.value = value;
  return out;
}

template <typename Scalar>
DistanceEval<Scalar> raw_distance(const Gaussian2<Scalar>& pred, const Gaussian2<Scalar>& gt,
                                  const LossConfig<Scalar>& cfg) {
  switch (cfg.kind) {
    case LossKind::kGwd: {
      const auto sq = gwd_squared_eval(pred, gt);
      const Scalar d = std::sqrt(sq.value);
      return chain(sq, d, d > 0 ? Scalar(0.5) / d : Scalar(0));
    }
    case LossKind::kKld:
      switch (cfg.kld_direction) {
        case KldDirection::kPredToGt:
          return kld_first(pred, gt);
        case KldDirection::kGtToPred:
          return kld_second(pred, gt);
        case KldDirection::kSymmetric: {
          const auto f = kld_first(pred, gt);
          const auto s = kld_second(pred, gt);
          DistanceEval<Scalar> e;
          e.value = Scalar(0.5) * (f.value + s.value);
          e.d_mu = Scalar(0.5) * (f.d_mu + s.d_mu);
          e.d_a = Scalar(0.5) * (f.d_a + s.d_a);
          e.d_b = Scalar(0.5) * (f.d_b + s.d_b);
          e.d_c = Scalar(0.5) * (f.d_c + s.d_c);
          return e;
        }
      }
      break;
    case LossKind::kProbIou: {
      const auto bd = bhattacharyya(pred, gt);
      const Scalar one_minus = -std::expm1(-bd.value);
      const Scalar hellinger = std::sqrt(std::max(one_minus, Scalar(0)));
      const Scalar slope = hellinger > 0 ? std::exp(-bd.value) / (2 * hellinger) : Scalar(0);
      return chain(bd, hellinger, slope);
    }
  }
  throw InvalidInput("unknown loss kind");
}

template <typename Scalar>
DistanceEval<Scalar> evaluate(const Gaussian2<Scalar>& pred, const Gaussian2<Scalar>& gt,
                              const LossConfig<Scalar>& cfg) {
  require_positive_definite(pred, "loss prediction");
  require_positive_definite(gt, "loss target");
  if (!(cfg.tau >= 0)) throw InvalidInput("loss tau must be non-negative");
  const auto d = raw_distance(pred, gt, cfg);
  if (cfg.transform == LossTransform::kRawDistance) return d;
  const Scalar denom = cfg.tau + std::log1p(d.value);
  return chain(d, 1 - 1 / denom, 1 / (denom * denom * (1 + d.value)));
}

}  // namespace detail

/// Bhattacharyya distance between two Gaussians.
template <typename Scalar>
Scalar bhattacharyya_distance(const Gaussian2<Scalar>& p, const Gaussian2<Scalar>& q) {
  require_positive_definite(p);
  require_positive_definite(q);
  return detail::bhattacharyya(p, q).value;
}

/// Squared 2-Wasserstein distance between two Gaussians.
template <typename Scalar>
Scalar gwd_squared(const Gaussian2<Scalar>& p, const Gaussian2<Scalar>& q) {
  require_positive_definite(p);
  require_positive_definite(q);
  return detail::gwd_squared_eval(p, q).value;
}

template <typename Scalar>
Scalar loss(const Gaussian2<Scalar>& pred, const Gaussian2<Scalar>& gt, const LossConfig<Scalar>& cfg = {}) {
  return detail::evaluate(pred, gt, cfg).value;
}

/// Gradient of loss(cholesky_to_gaussian(pred), gt) with respect to
/// (cx, cy, alpha, beta, gamma). At an exact minimum of a square-root type
/// distance the zero subgradient is returned.
template <typename Scalar>
Gradient5<Scalar> loss_grad(const GauchoParams<Scalar>& pred, const Gaussian2<Scalar>& gt,
                            const LossConfig<Scalar>& cfg = {}) {
  const auto e = detail::evaluate(cholesky_to_gaussian(pred), gt, cfg);
  Gradient5<Scalar> g;
  g << e.d_mu.x(), e.d_mu.y(), 2 * pred.alpha * e.d_a + pred.gamma * e.d_c, 2 * pred.beta * e.d_b,
      pred.alpha * e.d_c + 2 * pred.gamma * e.d_b;
  return g;
}

template <typename Scalar>
struct LandscapeSample {
  Scalar theta;
  Scalar loss;
};

template <typename Scalar>
struct LandscapeMinimum {
  Scalar theta;
  Scalar loss;
  bool is_global;
};

template <typename Scalar>
struct LossLandscape {
  ObbLe<Scalar> gt;
  std::vector<LandscapeSample<Scalar>> sweep;
  std::vector<LandscapeMinimum<Scalar>> minima;
};

/// Strict discrete local minima. The ends of the series are compared only
/// with their single neighbour: the angle domain does not wrap.
template <typename Scalar>
std::vector<LandscapeMinimum<Scalar>> find_minima(const std::vector<LandscapeSample<Scalar>>& sweep) {
  std::vector<LandscapeMinimum<Scalar>> minima;
  const std::size_t n = sweep.size();
  if (n < 2) return minima;
  for (std::size_t i = 0; i < n; ++i) {
    const bool below_left = i == 0 || sweep[i].loss < sweep[i - 1].loss;
    const bool below_right = i + 1 == n || sweep[i].loss < sweep[i + 1].loss;
    if (below_left && below_right) minima.push_back({sweep[i].theta, sweep[i].loss, false});
  }
  if (!minima.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < minima.size(); ++i)
      if (minima[i].loss < minima[best].loss) best = i;
    minima[best].is_global = true;
  }
  return minima;
}

/// Loss between gt and a candidate with gt's center and the given
/// dimensions, swept over theta_i = -pi/2 + i*pi/n_steps.
template <typename Scalar>
LossLandscape<Scalar> sweep_landscape(const ObbLe<Scalar>& gt, Scalar cand_w, Scalar cand_h,
                                      const LossConfig<Scalar>& cfg = {},
                                      const ConversionConfig<Scalar>& conv = {}, int n_steps = 360) {
  if (n_steps < 16) throw InvalidInput("sweep_landscape: n_steps must be at least 16");
  const auto target = obb_to_gaussian(gt, conv);
  LossLandscape<Scalar> land{gt, {}, {}};
  land.sweep.reserve(static_cast<std::size_t>(n_steps));
  for (int i = 0; i < n_steps; ++i) {
    const Scalar theta = -kHalfPi<Scalar> + kPi<Scalar> * Scalar(i) / Scalar(n_steps);
    const auto cand = ObbLe<Scalar>::canonical(gt.cx(), gt.cy(), cand_w, cand_h, theta);
    land.sweep.push_back({theta, loss(obb_to_gaussian(cand, conv), target, cfg)});
  }
  land.minima = find_minima(land.sweep);
  return land;
}

template <typename Scalar>
struct TraceRow {
  Scalar rotation;
  ObbLe<Scalar> le;
  Eigen::Matrix<Scalar, 3, 1> covariance;  // (a, b, c)
  Eigen::Matrix<Scalar, 3, 1> cholesky;    // (alpha, beta, gamma)
};

/// Rotates base about its own center over [-pi/2, pi/2) and records the
/// long-edge tuple, the covariance entries and the Cholesky entries.
template <typename Scalar>
std::vector<TraceRow<Scalar>> parametrization_trace(const ObbLe<Scalar>& base, int n_steps,
                                                    const ConversionConfig<Scalar>& conv = {}) {
  if (n_steps < 2) throw InvalidInput("parametrization_trace: n_steps must be at least 2");
  std::vector<TraceRow<Scalar>> rows;
  rows.reserve(static_cast<std::size_t>(n_steps));
  for (int i = 0; i < n_steps; ++i) {
    const Scalar phi = -kHalfPi<Scalar> + kPi<Scalar> * Scalar(i) / Scalar(n_steps);
    const auto obb = rotate_obb(base, phi, base.center());
    const auto g = obb_to_gaussian(obb, conv);
    const auto l = gaussian_to_cholesky(g);
    rows.push_back({phi, obb, {g.a, g.b, g.c}, {l.alpha, l.beta, l.gamma}});
  }
  return rows;
}

template <typename Scalar>
struct TraceSummary {
  std::vector<Scalar> le_jump_rotations;  // rotation of the sample right after each jump
  Scalar max_covariance_step = 0;
  Scalar max_cholesky_step = 0;
  Scalar covariance_step_bound = 0;  // 2 (lambda_max - lambda_min) * step
};

/// Counts long-edge angle jumps larger than jump_threshold between adjacent
/// samples and measures the largest adjacent covariance/Cholesky entry step.
template <typename Scalar>
TraceSummary<Scalar> summarize_trace(const std::vector<TraceRow<Scalar>>& rows,
                                     const ConversionConfig<Scalar>& conv = {},
                                     Scalar jump_threshold = kHalfPi<Scalar>) {
  TraceSummary<Scalar> s;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (std::abs(rows[i].le.theta() - rows[i - 1].le.theta()) > jump_threshold)
      s.le_jump_rotations.push_back(rows[i].rotation);
    s.max_covariance_step =
        std::max(s.max_covariance_step, (rows[i].covariance - rows[i - 1].covariance).cwiseAbs().maxCoeff());
    s.max_cholesky_step =
        std::max(s.max_cholesky_step, (rows[i].cholesky - rows[i - 1].cholesky).cwiseAbs().maxCoeff());
  }
  if (rows.size() >= 2) {
    const auto& le = rows.front().le;
    const Scalar step = rows[1].rotation - rows[0].rotation;
    s.covariance_step_bound = 2 * conv.s * (le.w() * le.w() - le.h() * le.h()) * step;
  }
  return s;
}

}  // namespace gaucho

#endif  // GAUCHO_LOSSES_HPP

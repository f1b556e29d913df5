#include "gaucho/bounds_suite.hpp"

#include "gaucho/repr.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gaucho {

BoundsSample draw_bounds_sample(std::uint64_t seed, std::size_t index, const BoundsSuiteOptions& opts) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(std::uint64_t(index) >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> dim(opts.min_dim, opts.max_dim);
  std::uniform_real_distribution<double> ang(-kHalfPi<double>, kHalfPi<double>);
  std::uniform_real_distribution<double> log_s(std::log(1.0 / 16.0), 0.0);
  BoundsSample smp;
  smp.index = index;
  smp.w = dim(rng);
  smp.h = opts.force_square ? smp.w : dim(rng);
  smp.theta = ang(rng);
  smp.s = std::exp(log_s(rng));
  return smp;
}

std::optional<double> check_bounds_sample(const BoundsSample& smp, const BoundsSuiteOptions& opts,
                                          std::vector<BoundsViolation>& out) {
  const ConversionConfigd cfg{smp.s};
  const double slack = opts.slack;
  auto require = [&](bool ok, const char* check, double value, double bound) {
    if (!ok) out.push_back({smp, check, value, bound});
  };

  const double lmin = smp.s * std::min(smp.w, smp.h) * std::min(smp.w, smp.h);
  const double lmax = smp.s * std::max(smp.w, smp.h) * std::max(smp.w, smp.h);
  const auto g = gaussian_from_shape<double>(Eigen::Vector2d::Zero(), smp.w, smp.h, smp.theta, cfg);
  const double lo = lmin * (1 - slack), hi = lmax * (1 + slack);
  require(g.a >= lo, "a >= lambda_min", g.a, lmin);
  require(g.a <= hi, "a <= lambda_max", g.a, lmax);
  require(g.b >= lo, "b >= lambda_min", g.b, lmin);
  require(g.b <= hi, "b <= lambda_max", g.b, lmax);
  const double c_bound = 0.5 * (lmax - lmin);
  require(std::abs(g.c) <= c_bound + slack * lmax, "|c| <= (lambda_max - lambda_min)/2", std::abs(g.c), c_bound);

  const auto bounds = cholesky_bounds(smp.w, smp.h, cfg);
  const auto p = gaussian_to_cholesky(g);
  const double dlo = bounds.lo_diag * (1 - slack), dhi = bounds.hi_diag * (1 + slack);
  require(p.alpha >= dlo, "alpha >= sqrt(lambda_min)", p.alpha, bounds.lo_diag);
  require(p.alpha <= dhi, "alpha <= sqrt(lambda_max)", p.alpha, bounds.hi_diag);
  require(p.beta >= dlo, "beta >= sqrt(lambda_min)", p.beta, bounds.lo_diag);
  require(p.beta <= dhi, "beta <= sqrt(lambda_max)", p.beta, bounds.hi_diag);
  require(std::abs(p.gamma) <= bounds.gamma_max + slack * bounds.hi_diag, "|gamma| <= gamma_max",
          std::abs(p.gamma), bounds.gamma_max);

  if (smp.w == smp.h) {
    require(p.gamma == 0.0, "gamma == 0 for squares", p.gamma, 0.0);
    return std::nullopt;
  }
  const auto at_star = gaussian_to_cholesky(
      gaussian_from_shape<double>(Eigen::Vector2d::Zero(), smp.w, smp.h, bounds.theta_star, cfg));
  const double gap = bounds.gamma_max - std::abs(at_star.gamma);
  require(std::abs(gap) <= opts.tightness_tol, "|gamma(theta_star)| == gamma_max", std::abs(at_star.gamma),
          bounds.gamma_max);
  return gap;
}

BoundsSuiteReport run_bounds_suite(const BoundsSuiteOptions& opts) {
  if (opts.samples == 0) throw InvalidInput("bounds suite needs at least one sample");
  if (!(opts.min_dim > 0) || !(opts.max_dim >= opts.min_dim))
    throw InvalidInput("bounds suite needs 0 < min_dim <= max_dim");
  BoundsSuiteReport rep;
  rep.samples = opts.samples;
  for (std::size_t i = 0; i < opts.samples; ++i) {
    const auto gap = check_bounds_sample(draw_bounds_sample(opts.seed, i, opts), opts, rep.violations);
    if (!gap) continue;
    ++rep.tightness_checked;
    rep.max_tightness_gap = std::max(rep.max_tightness_gap, std::abs(*gap));
  }
  return rep;
}

}  // namespace gaucho

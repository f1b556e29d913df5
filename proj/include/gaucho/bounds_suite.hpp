// Randomized property suite for the covariance and Cholesky entry bounds.
#ifndef GAUCHO_BOUNDS_SUITE_HPP
#define GAUCHO_BOUNDS_SUITE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gaucho {

struct BoundsSuiteOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 7;
  bool force_square = false;  // draw h = w
  double slack = 1e-12;       // relative slack on every inequality
  double tightness_tol = 1e-9;
  double min_dim = 1.0, max_dim = 20.0;
};

/// One draw. Each sample has its own generator seeded from (seed, index),
/// so a single failing case can be replayed without the others.
struct BoundsSample {
  std::size_t index = 0;
  double w = 0, h = 0, theta = 0, s = 0;
};

BoundsSample draw_bounds_sample(std::uint64_t seed, std::size_t index, const BoundsSuiteOptions& opts = {});

struct BoundsViolation {
  BoundsSample sample;
  std::string check;
  double value = 0, bound = 0;
};

struct BoundsSuiteReport {
  std::size_t samples = 0;
  std::size_t tightness_checked = 0;
  double max_tightness_gap = 0;  // worst |gamma_max - |gamma(theta_star)||
  std::vector<BoundsViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// Checks one sample, appending any violations. Returns the tightness gap,
/// or nothing for squares where theta_star is undefined.
std::optional<double> check_bounds_sample(const BoundsSample& smp, const BoundsSuiteOptions& opts,
                                          std::vector<BoundsViolation>& out);

BoundsSuiteReport run_bounds_suite(const BoundsSuiteOptions& opts);

}  // namespace gaucho

#endif  // GAUCHO_BOUNDS_SUITE_HPP

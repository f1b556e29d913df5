// Full-size acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
#include "cli.hpp"
#include "gaucho/bounds_suite.hpp"
#include "gaucho/eval.hpp"
#include "gaucho/heads.hpp"
#include "gaucho/losses.hpp"
#include "gaucho/overlap.hpp"
#include "gaucho/repr.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace gaucho;

namespace {

int g_failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  if (!ok) ++g_failures;
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double axial_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kPi<double>);
  return std::min(d, kPi<double> - d);
}

void roundtrip() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ratio(1 + 1e-6, 20), shortside(1, 50), pos(-1000, 1000),
      ang(-kHalfPi<double>, kHalfPi<double>);
  const int n = 100000;
  double dim_err = 0, ang_err = 0;
  Stopwatch sw;
  for (int i = 0; i < n; ++i) {
    const ConversionConfigd cfg{i % 2 ? 1.0 / 12 : 0.25};
    const double h = shortside(rng);
    const auto b = ObbLed::canonical(pos(rng), pos(rng), ratio(rng) * h, h, ang(rng));
    const auto back = gaussian_to_obb(cholesky_to_gaussian(gaussian_to_cholesky(obb_to_gaussian(b, cfg))), cfg);
    dim_err = std::max({dim_err, std::abs(back.w() - b.w()) / b.w(), std::abs(back.h() - b.h()) / b.h()});
    ang_err = std::max(ang_err, axial_distance(back.theta(), b.theta()));
  }
  const double t = sw.seconds();
  report(dim_err <= 1e-9 && ang_err <= 1e-7 && t < 10, "roundtrip",
         fmt("%d boxes, aspect in [1+1e-6, 20], s in {1/4, 1/12}; max rel dim err %.2e (<= 1e-9), max angle err "
             "%.2e rad (<= 1e-7), %.2f s (< 10 s)",
             n, dim_err, ang_err, t));
}

void bounds() {
  BoundsSuiteOptions opts;
  opts.samples = 100000;
  opts.seed = 7;
  Stopwatch sw;
  const auto rep = run_bounds_suite(opts);
  const double t = sw.seconds();
  // Independent dense sweep for (3, 1), s = 1/4.
  double best = 0, best_theta = 0;
  const int n = 360000;
  for (int i = 0; i < n; ++i) {
    const double th = -kHalfPi<double> + kPi<double> * i / n;
    const double g = std::abs(gaussian_to_cholesky(gaussian_from_shape<double>({0, 0}, 3, 1, th, {0.25})).gamma);
    if (g > best) best = g, best_theta = th;
  }
  const bool sweep_ok = std::abs(best - 1.0) <= 1e-9 && std::abs(std::abs(rad_to_deg(best_theta)) - 60) <= 1e-3;
  report(rep.passed() && rep.max_tightness_gap <= 1e-9 && sweep_ok && t < 10, "bound-suite",
         fmt("%zu samples (seed 7), %zu violations, tightness gap %.2e over %zu samples (<= 1e-9), %.2f s; (3,1) "
             "sweep max |gamma| %.12f at %.4f deg",
             rep.samples, rep.violations.size(), rep.max_tightness_gap, rep.tightness_checked, t, best,
             rad_to_deg(best_theta)));
}

void landscape() {
  for (const std::string kind : {"kld", "gwd", "probiou"}) {
    std::ostringstream out, err;
    const int code =
        cli::run_cli({"landscape", "--gt", "3,1,89", "--dims", "3,1", "--loss", kind, "--steps", "3600"}, out, err);
    double global = std::nan(""), at_boundary = std::nan(""), at_zero = std::nan("");
    bool boundary_min = false;
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto c1 = line.find(','), c2 = line.rfind(',');
      const double th = std::stod(line.substr(0, c1)), v = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
      const std::string tag = line.substr(c2 + 1);
      if (tag == "sample" && std::abs(th) < 1e-9) at_zero = v;
      if (tag == "global_min") global = th;
      if (tag == "local_min" && std::abs(th + 90) < 1e-9) boundary_min = true, at_boundary = v;
    }
    const bool ok = code == 0 && std::abs(global - 89) <= 0.05 && boundary_min && at_boundary < at_zero;
    report(ok, "landscape-" + kind,
           fmt("3600 steps; global min at %.3f deg (89 +- 0.05); boundary local min %s at -90 deg, loss %.6g < "
               "loss(0) %.6g",
               global, boundary_min ? "present" : "MISSING", at_boundary, at_zero));
  }
}

void trace() {
  const ConversionConfigd conv{0.25};
  const auto rows = parametrization_trace(ObbLed::canonical(0, 0, 3, 1, deg_to_rad(30.0)), 3600, conv);
  const auto sum = summarize_trace(rows, conv);
  const bool one = sum.le_jump_rotations.size() == 1;
  const double at = one ? rad_to_deg(sum.le_jump_rotations[0]) : std::nan("");
  report(one && std::abs(at - 60) <= 0.1 && sum.max_covariance_step <= sum.covariance_step_bound * 1.01,
         "parametrization-trace",
         fmt("3600 steps; %zu LE jump(s) at %.3f deg (60 +- 0.1); max covariance step %.3e <= 1.01 * %.3e; max "
             "cholesky step %.3e",
             sum.le_jump_rotations.size(), at, sum.max_covariance_step, sum.covariance_step_bound,
             sum.max_cholesky_step));
}

void gradients() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> pos(-5, 5), size(0.5, 4), shear(-3, 3);
  auto params = [&] { return GauchoParamsd{pos(rng), pos(rng), size(rng), size(rng), shear(rng)}; };
  const std::pair<LossKind, const char*> kinds[] = {
      {LossKind::kGwd, "gwd"}, {LossKind::kKld, "kld"}, {LossKind::kProbIou, "probiou"}};
  for (const auto& [kind, name] : kinds) {
    LossConfig<double> cfg;
    cfg.kind = kind;
    double worst = 0, max_abs = 0;
    int bad = 0;
    Stopwatch sw;
    for (int i = 0; i < 1000; ++i) {
      const auto p = params();
      const auto gt = cholesky_to_gaussian(params());
      const auto analytic = loss_grad(p, gt, cfg);
      const auto numeric = oracle::fd_gradient(p, gt, cfg);
      max_abs = std::max(max_abs, (analytic - numeric).cwiseAbs().maxCoeff());
      if (!oracle::gradients_agree(analytic, numeric, 1e-4, 1e-8, &worst)) ++bad;
    }
    const double t = sw.seconds();
    report(bad == 0 && t < 5, std::string("gradient-") + name,
           fmt("1000 pairs, h = 1e-5; %d disagreeing, worst rel err %.2e (< 1e-4, abs floor 1e-8), max abs "
               "diff %.2e, %.3f s (< 5 s)",
               bad, worst, max_abs, t));
  }
}

void iou_oracles() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> pos(-4, 4), dim(1, 10), ang(-kHalfPi<double>, kHalfPi<double>);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = ObbLed::canonical(pos(rng), pos(rng), dim(rng), dim(rng), ang(rng));
    const auto y = ObbLed::canonical(pos(rng), pos(rng), dim(rng), dim(rng), ang(rng));
    worst = std::max(worst, std::abs(obb_iou(x, y) - oracle::raster_obb_iou(x, y, 2048)));
  }
  report(worst <= 2e-3, "obb-iou-raster", fmt("1000 pairs vs 2048^2 raster; max |diff| %.2e (<= 2e-3)", worst));

  int beyond = 0, overlapping = 0;
  double worst_z = 0;
  Stopwatch sw;
  for (int i = 0; i < 200; ++i) {
    const auto x = OrientedEllipsed::canonical(pos(rng), pos(rng), dim(rng) / 2, dim(rng) / 2, ang(rng));
    const auto y = OrientedEllipsed::canonical(pos(rng), pos(rng), dim(rng) / 2, dim(rng) / 2, ang(rng));
    const auto mc = oracle::monte_carlo_ellipse_iou(x, y, 10'000'000, 5000 + i);
    const double v = ellipse_iou(x, y);
    const double diff = std::abs(v - mc.iou);
    if (mc.std_error > 0) {
      ++overlapping;
      worst_z = std::max(worst_z, diff / mc.std_error);
      if (diff > 3 * mc.std_error) ++beyond;
    } else if (diff > 0) {
      ++beyond;
    }
  }
  report(beyond == 0, "ellipse-iou-monte-carlo",
         fmt("200 pairs (%d overlapping) vs 1e7-sample estimates; %d beyond 3 SE, worst %.2f SE; %.1f s", overlapping,
             beyond, worst_z, sw.seconds()));
}

void eval_consistency() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> side(10, 40), aspect(1.5, 6), ang(-kHalfPi<double>, kHalfPi<double>),
      noise(-2, 2);
  std::vector<GroundTruthRecord> gts;
  const int images = 10000, per_image = 10;
  gts.reserve(images * per_image);
  for (int i = 0; i < images; ++i)
    for (int k = 0; k < per_image; ++k) {
      const double h = side(rng);
      gts.push_back({"img" + std::to_string(i), k % 2 ? "ship" : "plane",
                     ObbLed::canonical(300.0 * k, 0, aspect(rng) * h, h, ang(rng)), false});
    }
  std::vector<DetectionRecord> exact, noisy;
  exact.reserve(gts.size());
  noisy.reserve(gts.size());
  for (const auto& g : gts) {
    exact.push_back({g.image_id, g.category, g.shape, 1.0});
    const auto& b = g.shape;
    noisy.push_back({g.image_id, g.category,
                     ObbLed::canonical(b.cx(), b.cy(), b.w(), b.h(), b.theta() + deg_to_rad(noise(rng))), 1.0});
  }
  const auto iou = make_iou_fn(IouMode::kObb);
  ApOptions opts;
  opts.threads = 1;
  const auto ap = average_precision(exact, gts, iou, coco_thresholds(), opts);
  const auto oe_ap = average_precision(exact, gts, IouMode::kOe, coco_thresholds(), opts);
  const auto o_exact = orientation_error(exact, gts, iou, 0.5);
  const bool exact_ok = ap.at(0.5) == 1.0 && ap.at(0.75) == 1.0 && ap.mean_ap == 1.0 && oe_ap.mean_ap == 1.0 &&
                        o_exact.aoe == 0.0 && o_exact.moe == 0.0;
  report(exact_ok, "eval-exact",
         fmt("%zu matches; obb AP50 %.6f AP75 %.6f AP %.6f, oe AP %.6f (all exactly 1); AOE %.3g MOE %.3g (exactly 0)",
             gts.size(), ap.at(0.5), ap.at(0.75), ap.mean_ap, oe_ap.mean_ap, o_exact.aoe, o_exact.moe));

  const auto o = orientation_error(noisy, gts, iou, 0.5);
  report(o.matched == gts.size() && std::abs(o.aoe - 1) <= 0.05 && std::abs(o.moe - 1) <= 0.05, "eval-noise",
         fmt("U(-2, 2) deg noise, %zu of %zu matched; AOE %.4f deg, MOE %.4f deg (1 +- 0.05)", o.matched, gts.size(),
             o.aoe, o.moe));
}

void encoding_ambiguity() {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> side(1, 30), pos(-500, 500), ang(-kPi<double>, kPi<double>);
  const double sides[] = {1, 2.5, 8, 17, 30};
  double max_c = 0, max_dev = 0;
  bool identical = true;
  for (int i = 0; i < 10000; ++i) {
    const double w = sides[i % 5];
    const ConversionConfigd cfg{i % 2 ? 0.25 : 1.0 / 12};
    const double th = ang(rng);
    const Vec2<double> c(pos(rng), pos(rng));
    // Raw rotated-shape formula, and the canonical path after rotating a square.
    const auto raw = gaussian_from_shape<double>(c, w, w, th, cfg);
    const auto canon = obb_to_gaussian(rotate_obb(ObbLed::canonical(c.x(), c.y(), w, w, 0), th, c), cfg);
    const auto ref = obb_to_gaussian(ObbLed::canonical(0, 0, w, w, 0), cfg);
    max_c = std::max({max_c, std::abs(raw.c), std::abs(canon.c)});
    const double lam = cfg.s * w * w;
    max_dev = std::max({max_dev, std::abs(raw.a - ref.a) / lam, std::abs(raw.b - ref.b) / lam});
    identical = identical && canon.a == ref.a && canon.b == ref.b && canon.c == ref.c;
  }
  report(max_c <= 1e-12 && identical && max_dev <= 1e-12, "square-invariance",
         fmt("10000 squares, random theta; max |c| %.2e (<= 1e-12); canonical covariances %s; raw-formula max rel "
             "deviation %.2e",
             max_c, identical ? "bitwise identical" : "DIFFER", max_dev));

  std::uniform_real_distribution<double> dim(1, 20), phi(-2 * kPi<double>, 2 * kPi<double>),
      tha(-kHalfPi<double>, kHalfPi<double>);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto b = ObbLed::canonical(pos(rng), pos(rng), dim(rng), dim(rng), tha(rng));
    const double f = phi(rng);
    const auto lhs = obb_to_gaussian(rotate_obb(b, f), {0.25});
    const auto rhs = rotate_gaussian(obb_to_gaussian(b, {0.25}), f);
    const double sc = std::max(1.0, lhs.trace());
    worst = std::max({worst, std::abs(lhs.a - rhs.a) / sc, std::abs(lhs.b - rhs.b) / sc, std::abs(lhs.c - rhs.c) / sc,
                      (lhs.mu - rhs.mu).norm() / std::max(1.0, b.center().norm())});
  }
  report(worst <= 1e-10, "rotation-equivariance",
         fmt("10000 (obb, phi) pairs; max residual %.2e relative to max(1, trace) (<= 1e-10)", worst));
}

void head_identities() {
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> pos(-1000, 1000), dim(1, 256), ang(-kHalfPi<double>, kHalfPi<double>);
  const ConversionConfigd cfg{0.25};
  int bad_free = 0, bad_based = 0, bad_oriented = 0;
  for (int i = 0; i < 10000; ++i) {
    const AnchorFreeContext<double> ctx{pos(rng), pos(rng), dim(rng)};
    const auto f = decode_anchor_free(ctx, HeadOffsets<double>{});
    const auto fo = gaucho_to_obb(f, cfg);
    if (!(f == GauchoParamsd{ctx.px, ctx.py, ctx.t, ctx.t, 0}) || std::abs(fo.w() - 2 * ctx.t) > 1e-12 * ctx.t ||
        std::abs(fo.h() - 2 * ctx.t) > 1e-12 * ctx.t)
      ++bad_free;

    const AnchorBox<double> box{pos(rng), pos(rng), dim(rng), dim(rng)};
    const auto g = decode_anchor_based(box, HeadOffsets<double>{}, cfg);
    const auto o = gaucho_to_obb(g, cfg);
    const double lw = std::max(box.aw, box.ah), sh = std::min(box.aw, box.ah);
    const double want_theta = box.aw >= box.ah ? 0.0 : kHalfPi<double>;
    if (!(g == GauchoParamsd{box.ax, box.ay, 0.5 * box.aw, 0.5 * box.ah, 0}) || o.cx() != box.ax ||
        o.cy() != box.ay || std::abs(o.w() - lw) > 1e-12 * lw || std::abs(o.h() - sh) > 1e-12 * lw ||
        axial_distance(o.theta(), want_theta) > 1e-12)
      ++bad_based;

    const auto anc = OrientedAnchor<double>::make(box, ang(rng), cfg);
    if (!(refine_oriented_anchor(anc, HeadOffsets<double>{}, cfg) == anc.form())) ++bad_oriented;
  }
  report(bad_free + bad_based + bad_oriented == 0, "head-zero-offset",
         fmt("10000 draws each; anchor-free square of side 2t at the cell: %d bad; anchor-based recovers the "
             "horizontal anchor: %d bad; oriented anchor unchanged: %d bad",
             bad_free, bad_based, bad_oriented));
}

}  // namespace

int main() {
  roundtrip();
  bounds();
  landscape();
  trace();
  gradients();
  iou_oracles();
  eval_consistency();
  encoding_ambiguity();
  head_identities();
  std::cout << "NOTE out-of-scope: trained-detector AP tables and trained-model AOE/MOE need GPU training on "
               "DOTA/HRSC; replaced by the property suites above"
            << std::endl;
  std::cout << (g_failures == 0 ? "ALL PASS" : std::to_string(g_failures) + " FAILED") << std::endl;
  return g_failures == 0 ? 0 : 1;
}

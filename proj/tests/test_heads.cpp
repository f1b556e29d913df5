#include "gaucho/heads.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace gaucho;

namespace {

using Off = HeadOffsets<double>;
const ConversionConfigd kCfg{0.25};

void expect_params_near(const GauchoParamsd& a, const GauchoParamsd& b, double tol) {
  EXPECT_NEAR(a.cx, b.cx, tol);
  EXPECT_NEAR(a.cy, b.cy, tol);
  EXPECT_NEAR(a.alpha, b.alpha, tol);
  EXPECT_NEAR(a.beta, b.beta, tol);
  EXPECT_NEAR(a.gamma, b.gamma, tol);
}

}  // namespace

TEST(AnchorFree, ZeroOffsetsGiveStrideSizedSquare) {
  const auto p = decode_anchor_free<double>({100, 60, 8}, Off{});
  EXPECT_EQ(p, (GauchoParamsd{100, 60, 8, 8, 0}));
  const auto obb = gaucho_to_obb(p, kCfg);
  EXPECT_DOUBLE_EQ(obb.w(), 16);
  EXPECT_DOUBLE_EQ(obb.h(), 16);
  EXPECT_EQ(obb.theta(), 0);
}

TEST(AnchorFree, FormulaEvaluation) {
  const auto p = decode_anchor_free<double>({0, 0, 4}, Off{1, -1, 0, 0, 0.5});
  EXPECT_EQ(p, (GauchoParamsd{4, -4, 4, 4, 2}));
  const auto q = decode_anchor_free<double>({0, 0, 8}, Off{0, 0, std::log(2.0), -std::log(2.0), 0});
  EXPECT_NEAR(q.alpha, 16, 1e-14);
  EXPECT_NEAR(q.beta, 4, 1e-14);
  EXPECT_EQ(q.gamma, 0);
}

TEST(AnchorFree, EncodeExamples) {
  const AnchorFreeContext<double> ctx{3, 5, 16};
  EXPECT_EQ(encode_anchor_free(ctx, decode_anchor_free(ctx, Off{})), Off{});
  const auto off = encode_anchor_free<double>({0, 0, 4}, {4, -4, 4, 4, 2});
  EXPECT_EQ(off, (Off{1, -1, 0, 0, 0.5}));
  EXPECT_NEAR(encode_anchor_free<double>({0, 0, 8}, {0, 0, 16, 8, 0}).d_alpha, std::log(2.0), 1e-15);
}

TEST(AnchorFree, OverflowGuard) {
  EXPECT_THROW(decode_anchor_free<double>({0, 0, 8}, Off{0, 0, 41, 0, 0}), OffsetOverflow);
  EXPECT_THROW(decode_anchor_free<double>({0, 0, 8}, Off{0, 0, 0, -41, 0}), OffsetOverflow);
  EXPECT_NO_THROW(decode_anchor_free<double>({0, 0, 8}, Off{0, 0, 40, -40, 1e6}));
  EXPECT_THROW(decode_anchor_free<double>({0, 0, 8}, Off{NAN, 0, 0, 0, 0}), InvalidInput);
  EXPECT_THROW(decode_anchor_free<double>({0, 0, 0}, Off{}), InvalidInput);
}

TEST(AnchorBased, ZeroOffsetsRecoverAnchor) {
  const AnchorBox<double> a{0, 0, 8, 8};
  const auto p = decode_anchor_based(a, Off{}, kCfg);
  EXPECT_EQ(p, (GauchoParamsd{0, 0, 4, 4, 0}));
  const auto obb = gaucho_to_obb(p, kCfg);
  EXPECT_DOUBLE_EQ(obb.w(), 8);
  EXPECT_DOUBLE_EQ(obb.h(), 8);

  const AnchorBox<double> r{10, 20, 16, 8};
  const auto q = gaucho_to_obb(decode_anchor_based(r, Off{}, kCfg), kCfg);
  EXPECT_DOUBLE_EQ(q.cx(), 10);
  EXPECT_DOUBLE_EQ(q.cy(), 20);
  EXPECT_DOUBLE_EQ(q.w(), 16);
  EXPECT_DOUBLE_EQ(q.h(), 8);
  EXPECT_EQ(q.theta(), 0);
}

TEST(AnchorBased, DeltaPathForSquareAnchor) {
  const auto p = decode_anchor_based<double>({0, 0, 8, 8}, Off{0, 0, 0, 0, 1}, kCfg);
  EXPECT_DOUBLE_EQ(p.gamma, 0.5 * std::max(0.5 * 8, 0.0) * 1);
  EXPECT_DOUBLE_EQ(p.gamma, 2);
}

TEST(AnchorBased, SideDifferencePathForElongatedAnchor) {
  const auto p = decode_anchor_based<double>({0, 0, 16, 8}, Off{0, 0, 0, 0, 1}, kCfg);
  EXPECT_DOUBLE_EQ(p.gamma, 0.5 * std::max(4.0, 8.0));
  EXPECT_DOUBLE_EQ(p.gamma, 4);
}

TEST(AnchorBased, ConstantDelta) {
  const DeltaPolicy<double> d{DeltaMode::kConstant, 10.0};
  const auto p = decode_anchor_based<double>({0, 0, 8, 8}, Off{0, 0, 0, 0, 1}, kCfg, d);
  EXPECT_DOUBLE_EQ(p.gamma, 5);
  const DeltaPolicy<double> zero{DeltaMode::kConstant, 0.0};
  EXPECT_THROW(encode_anchor_based<double>({0, 0, 8, 8}, {0, 0, 4, 4, 1}, kCfg, zero), DomainError);
}

TEST(AnchorBased, EncodeExamples) {
  const AnchorBox<double> a{0, 0, 8, 8};
  EXPECT_EQ(encode_anchor_based(a, decode_anchor_based(a, Off{}, kCfg), kCfg), Off{});
  EXPECT_DOUBLE_EQ(encode_anchor_based<double>(a, {0, 0, 4, 4, 2}, kCfg).d_gamma, 1);
  EXPECT_NEAR(encode_anchor_based<double>(a, {0, 0, 8, 4, 0}, kCfg).d_alpha, std::log(2.0), 1e-15);
  EXPECT_THROW(encode_anchor_based<double>(a, {0, 0, 0, 4, 0}, kCfg), InvalidInput);
  EXPECT_THROW(decode_anchor_based<double>({0, 0, -1, 4}, Off{}, kCfg), InvalidInput);
}

TEST(OrientedAnchor, ZeroOffsetsKeepAnchor) {
  for (double t : {-80.0, -10.0, 0.0, 33.0, 89.0}) {
    const auto anc = OrientedAnchor<double>::make({5, -3, 12, 4}, deg_to_rad(t), kCfg);
    EXPECT_EQ(refine_oriented_anchor(anc, Off{}, kCfg), anc.form());
  }
}

TEST(OrientedAnchor, GammaRefinement) {
  const auto anc = OrientedAnchor<double>::make({0, 0, 3, 1}, deg_to_rad(45.0), kCfg);
  EXPECT_NEAR(anc.form().alpha, 1.118034, 1e-6);
  EXPECT_NEAR(anc.form().beta, 0.670820, 1e-6);
  EXPECT_NEAR(anc.form().gamma, 0.894427, 1e-6);
  const auto p = refine_oriented_anchor(anc, Off{0, 0, 0, 0, 1}, kCfg);
  EXPECT_NEAR(p.gamma, anc.form().gamma + 0.5 * std::max(0.5, 2.0), 1e-15);
  EXPECT_NEAR(p.gamma, 1.894427, 1e-6);
  // Beyond the bound of the anchor's own shape, still positive-definite.
  EXPECT_GT(p.gamma, cholesky_bounds(3.0, 1.0, kCfg).gamma_max);
  EXPECT_TRUE(cholesky_to_gaussian(p).is_positive_definite());
}

TEST(OrientedAnchor, AlphaDoubles) {
  const auto anc = OrientedAnchor<double>::make({0, 0, 6, 2}, 0.3, kCfg);
  const auto p = refine_oriented_anchor(anc, Off{0, 0, std::log(2.0), 0, 0}, kCfg);
  EXPECT_NEAR(p.alpha, 2 * anc.form().alpha, 1e-15);
  EXPECT_THROW(refine_oriented_anchor(anc, Off{0, 0, 50, 0, 0}, kCfg), OffsetOverflow);
}

TEST(HeadsProperties, EncodeDecodeInverses) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-3, 3), dim(1, 128), pos(-400, 400), par(0.1, 60), ang(-1.5, 1.5);
  const std::vector<double> strides{4, 8, 16, 32, 64};
  for (int i = 0; i < 5000; ++i) {
    const Off off{u(rng), u(rng), u(rng), u(rng), u(rng)};
    const GauchoParamsd tgt{pos(rng), pos(rng), par(rng), par(rng), u(rng) * 20};

    const AnchorFreeContext<double> ctx{pos(rng), pos(rng), strides[i % strides.size()]};
    const auto rt_af = decode_anchor_free(ctx, encode_anchor_free(ctx, tgt));
    ASSERT_NEAR((rt_af.as_vector() - tgt.as_vector()).cwiseAbs().maxCoeff(), 0, 1e-12 * 400);
    ASSERT_NEAR((encode_anchor_free(ctx, decode_anchor_free(ctx, off)).as_vector() - off.as_vector())
                    .cwiseAbs()
                    .maxCoeff(),
                0, 1e-12);

    const AnchorBox<double> box{pos(rng), pos(rng), dim(rng), dim(rng)};
    const auto rt_ab = decode_anchor_based(box, encode_anchor_based(box, tgt, kCfg), kCfg);
    ASSERT_NEAR((rt_ab.as_vector() - tgt.as_vector()).cwiseAbs().maxCoeff(), 0, 1e-12 * 400);
    ASSERT_NEAR((encode_anchor_based(box, decode_anchor_based(box, off, kCfg), kCfg).as_vector() - off.as_vector())
                    .cwiseAbs()
                    .maxCoeff(),
                0, 1e-12);

    const auto anc = OrientedAnchor<double>::make(box, ang(rng), kCfg);
    const auto rt_or = refine_oriented_anchor(anc, encode_oriented_anchor(anc, tgt, kCfg), kCfg);
    ASSERT_NEAR((rt_or.as_vector() - tgt.as_vector()).cwiseAbs().maxCoeff(), 0, 1e-12 * 400);
    ASSERT_NEAR(
        (encode_oriented_anchor(anc, refine_oriented_anchor(anc, off, kCfg), kCfg).as_vector() - off.as_vector())
            .cwiseAbs()
            .maxCoeff(),
        0, 1e-12);
  }
}

TEST(HeadsProperties, ZeroOffsetIdentityIsExact) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> dim(1, 256), pos(-1000, 1000);
  for (int i = 0; i < 2000; ++i) {
    const AnchorBox<double> box{pos(rng), pos(rng), dim(rng), dim(rng)};
    const auto p = decode_anchor_based(box, Off{}, kCfg);
    ASSERT_EQ(p.cx, box.ax);
    ASSERT_EQ(p.cy, box.ay);
    ASSERT_EQ(p.gamma, 0.0);
    ASSERT_NEAR(p.alpha, 0.5 * box.aw, 1e-15 * box.aw);
    ASSERT_NEAR(p.beta, 0.5 * box.ah, 1e-15 * box.ah);
    const AnchorFreeContext<double> ctx{pos(rng), pos(rng), dim(rng)};
    const auto q = decode_anchor_free(ctx, Off{});
    ASSERT_EQ(q.cx, ctx.px);
    ASSERT_EQ(q.cy, ctx.py);
    ASSERT_EQ(q.alpha, ctx.t);
    ASSERT_EQ(q.beta, ctx.t);
    ASSERT_EQ(q.gamma, 0.0);
  }
}

TEST(HeadsProperties, DecodeIsAlwaysPositiveDefinite) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(-40, 40), big(-1e6, 1e6);
  const AnchorBox<double> box{0, 0, 32, 8};
  const auto anc = OrientedAnchor<double>::make(box, 0.7, kCfg);
  // det = (alpha beta)^2 exactly; the factor must be finite with a positive diagonal.
  auto factor_pd = [](const GauchoParamsd& p) {
    return std::isfinite(p.gamma) && std::isfinite(p.alpha) && std::isfinite(p.beta) && p.alpha > 0 && p.beta > 0;
  };
  for (int i = 0; i < 5000; ++i) {
    const Off off{big(rng), big(rng), u(rng), u(rng), big(rng)};
    ASSERT_TRUE(factor_pd(decode_anchor_free<double>({0, 0, 8}, off)));
    ASSERT_TRUE(factor_pd(decode_anchor_based(box, off, kCfg)));
    ASSERT_TRUE(factor_pd(refine_oriented_anchor(anc, off, kCfg)));
  }
  // Covariance entries resolve a b - c^2 while (gamma / beta)^2 stays well inside 1 / eps.
  std::uniform_real_distribution<double> ue(-8, 8), ug(-100, 100);
  for (int i = 0; i < 5000; ++i) {
    const Off off{big(rng), big(rng), ue(rng), ue(rng), ug(rng)};
    ASSERT_TRUE(cholesky_to_gaussian(decode_anchor_free<double>({0, 0, 8}, off)).is_positive_definite());
    ASSERT_TRUE(cholesky_to_gaussian(decode_anchor_based(box, off, kCfg)).is_positive_definite());
    ASSERT_TRUE(cholesky_to_gaussian(refine_oriented_anchor(anc, off, kCfg)).is_positive_definite());
  }
}

TEST(HeadsProperties, SquareAnchorStretchesToTwoToOne) {
  // Targets whose long side matches the anchor side, at the gamma-maximizing rotation.
  for (double side : {8.0, 16.0, 64.0}) {
    const AnchorBox<double> anchor{0, 0, side, side};
    for (double ratio : {1.25, 1.5, 2.0}) {
      const double w = side, h = side / ratio;
      const auto b = cholesky_bounds(w, h, kCfg);
      for (double sign : {1.0, -1.0}) {
        const auto tgt = obb_to_gaucho(ObbLed::canonical(0, 0, w, h, sign * b.theta_star), kCfg);
        const auto off = encode_anchor_based(anchor, tgt, kCfg);
        EXPECT_LE(std::abs(off.d_gamma), 1.0 + 1e-12) << "side " << side << " ratio " << ratio;
      }
    }
    const auto b = cholesky_bounds(side, side / 2, kCfg);
    const auto tgt = obb_to_gaucho(ObbLed::canonical(0, 0, side, side / 2, b.theta_star), kCfg);
    EXPECT_NEAR(std::abs(encode_anchor_based(anchor, tgt, kCfg).d_gamma), 1.0, 1e-12);
  }
}

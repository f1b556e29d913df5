#include "gaucho/batch.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace gaucho;

namespace {

BatchArray<double> random_obbs(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> pos(-100, 100), dim(1, 50), ang(-90, 89.999);
  BatchArray<double> out(n, 5);
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) << pos(rng), pos(rng), dim(rng), dim(rng), ang(rng);
  return out;
}

}  // namespace

TEST(Batch, ConvertMatchesScalarPath) {
  std::mt19937_64 rng(51);
  const ConversionConfigd conv{0.25};
  const auto obbs = random_obbs(rng, 500);
  const auto gauchos = batch_convert(BatchKind::kObb, BatchKind::kGaucho, obbs, conv);
  const auto gaussians = batch_convert(BatchKind::kObb, BatchKind::kGaussian, obbs, conv);
  const auto ellipses = batch_convert(BatchKind::kObb, BatchKind::kEllipse, obbs, conv);
  for (Eigen::Index i = 0; i < obbs.rows(); ++i) {
    const auto o = ObbLed::canonical(obbs(i, 0), obbs(i, 1), obbs(i, 2), obbs(i, 3), deg_to_rad(obbs(i, 4)));
    const auto g = obb_to_gaussian(o, conv);
    const auto p = gaussian_to_cholesky(g);
    ASSERT_EQ(gauchos.row(i), (Eigen::Matrix<double, 1, 5>() << p.cx, p.cy, p.alpha, p.beta, p.gamma).finished());
    ASSERT_EQ(gaussians.row(i), (Eigen::Matrix<double, 1, 5>() << g.mu.x(), g.mu.y(), g.a, g.b, g.c).finished());
    const auto e = gaussian_to_ellipse(g, conv);
    ASSERT_EQ(ellipses(i, 2), e.r1());
  }
  const auto back = batch_convert(BatchKind::kGaucho, BatchKind::kObb, gauchos, conv);
  const auto again = batch_convert(BatchKind::kObb, BatchKind::kGaucho, back, conv);
  EXPECT_LT((again - gauchos).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Batch, EmptyBatch) {
  const BatchArray<double> empty(0, 5);
  EXPECT_EQ(batch_convert(BatchKind::kObb, BatchKind::kGaucho, empty).rows(), 0);
  const auto r = batch_loss_and_grad(empty, empty);
  EXPECT_EQ(r.loss.size(), 0);
  EXPECT_EQ(r.grad.rows(), 0);
}

TEST(Batch, InvalidRowsAreListed) {
  BatchArray<double> b(4, 5);
  b << 0, 0, 3, 1, 0,  //
      0, 0, -1, 1, 0,  //
      0, 0, 3, 1, 10,  //
      0, 0, 3, 1, NAN;
  try {
    batch_convert(BatchKind::kObb, BatchKind::kGaucho, b);
    FAIL() << "expected BatchError";
  } catch (const BatchError& e) {
    EXPECT_EQ(e.rows(), (std::vector<Eigen::Index>{1, 3}));
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
  BatchArray<double> gt(2, 5);
  gt << 0, 0, 1, 1, 0,  //
      0, 0, 1, 1, 5;
  BatchArray<double> pred(2, 5);
  pred << 0, 0, 1, 1, 0, 0, 0, 1, 1, 0;
  try {
    batch_loss_and_grad(pred, gt);
    FAIL() << "expected BatchError";
  } catch (const BatchError& e) {
    EXPECT_EQ(e.rows(), (std::vector<Eigen::Index>{1}));
  }
  EXPECT_THROW(batch_loss_and_grad(pred, BatchArray<double>(1, 5)), InvalidInput);
}

TEST(Batch, LossAndGradientMatchScalar) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(0.5, 3), c(-2, 2), pos(-5, 5);
  const Eigen::Index n = 200;
  BatchArray<double> pred(n, 5), gt(n, 5);
  for (Eigen::Index i = 0; i < n; ++i) {
    pred.row(i) << pos(rng), pos(rng), u(rng), u(rng), c(rng);
    const auto g = cholesky_to_gaussian(GauchoParamsd{pos(rng), pos(rng), u(rng), u(rng), c(rng)});
    gt.row(i) << g.mu.x(), g.mu.y(), g.a, g.b, g.c;
  }
  for (auto kind : {LossKind::kGwd, LossKind::kKld, LossKind::kProbIou}) {
    LossConfig<double> cfg;
    cfg.kind = kind;
    const auto r = batch_loss_and_grad(pred, gt, cfg);
    for (Eigen::Index i = 0; i < n; ++i) {
      const GauchoParamsd p{pred(i, 0), pred(i, 1), pred(i, 2), pred(i, 3), pred(i, 4)};
      const Gaussian2d g{{gt(i, 0), gt(i, 1)}, gt(i, 2), gt(i, 3), gt(i, 4)};
      ASSERT_EQ(r.loss[i], loss(cholesky_to_gaussian(p), g, cfg));
      ASSERT_EQ(r.grad.row(i), loss_grad(p, g, cfg).transpose());
    }
  }
}

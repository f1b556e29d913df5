// Row-batched entry points over N x 5 row-major arrays, the surface used by
// native bindings inside training loops. Each row is processed by the same
// single-record functions; angle columns are in degrees.
//
//   obb      [cx, cy, w, h, theta_deg]
//   gaucho   [cx, cy, alpha, beta, gamma]
//   gaussian [cx, cy, a, b, c]
//   ellipse  [cx, cy, r1, r2, theta_deg]
#ifndef GAUCHO_BATCH_HPP
#define GAUCHO_BATCH_HPP

#include "gaucho/core.hpp"
#include "gaucho/losses.hpp"
#include "gaucho/repr.hpp"

#include <sstream>
#include <vector>

namespace gaucho {

enum class BatchKind { kObb, kGaucho, kGaussian, kEllipse };

template <typename Scalar>
using BatchArray = Eigen::Matrix<Scalar, Eigen::Dynamic, 5, Eigen::RowMajor>;

/// Row-level failures, carrying the offending row indices.
class BatchError : public InvalidInput {
 public:
  BatchError(const std::string& what, std::vector<Eigen::Index> rows)
      : InvalidInput(what), rows_(std::move(rows)) {}
  const std::vector<Eigen::Index>& rows() const { return rows_; }

 private:
  std::vector<Eigen::Index> rows_;
};

template <typename Scalar>
Gaussian2<Scalar> row_to_gaussian(BatchKind kind, const Eigen::Matrix<Scalar, 1, 5>& r,
                                  const ConversionConfig<Scalar>& cfg) {
  switch (kind) {
    case BatchKind::kObb:
      return obb_to_gaussian(ObbLe<Scalar>::canonical(r[0], r[1], r[2], r[3], deg_to_rad(r[4])), cfg);
    case BatchKind::kGaucho:
      return cholesky_to_gaussian(GauchoParams<Scalar>{r[0], r[1], r[2], r[3], r[4]});
    case BatchKind::kGaussian: {
      Gaussian2<Scalar> g{{r[0], r[1]}, r[2], r[3], r[4]};
      require_positive_definite(g);
      return g;
    }
    case BatchKind::kEllipse:
      return ellipse_to_gaussian(
          OrientedEllipse<Scalar>::canonical(r[0], r[1], r[2], r[3], deg_to_rad(r[4])), cfg);
  }
  throw InvalidInput("unknown batch kind");
}

template <typename Scalar>
Eigen::Matrix<Scalar, 1, 5> gaussian_to_row(BatchKind kind, const Gaussian2<Scalar>& g,
                                            const ConversionConfig<Scalar>& cfg) {
  Eigen::Matrix<Scalar, 1, 5> out;
  switch (kind) {
    case BatchKind::kObb: {
      const auto o = gaussian_to_obb(g, cfg);
      out << o.cx(), o.cy(), o.w(), o.h(), rad_to_deg(o.theta());
      return out;
    }
    case BatchKind::kGaucho: {
      const auto p = gaussian_to_cholesky(g);
      out << p.cx, p.cy, p.alpha, p.beta, p.gamma;
      return out;
    }
    case BatchKind::kGaussian:
      out << g.mu.x(), g.mu.y(), g.a, g.b, g.c;
      return out;
    case BatchKind::kEllipse: {
      const auto e = gaussian_to_ellipse(g, cfg);
      out << e.cx(), e.cy(), e.r1(), e.r2(), rad_to_deg(e.theta());
      return out;
    }
  }
  throw InvalidInput("unknown batch kind");
}

namespace detail {
inline std::string describe_rows(const char* what, const std::vector<Eigen::Index>& rows,
                                 const std::string& first_reason) {
  std::ostringstream msg;
  msg << what << ": " << rows.size() << " invalid row(s), first at row " << rows.front() << " ("
      << first_reason << ")";
  return msg.str();
}
}  // namespace detail

template <typename Scalar>
BatchArray<Scalar> batch_convert(BatchKind from, BatchKind to, const BatchArray<Scalar>& batch,
                                 const ConversionConfig<Scalar>& cfg = {}) {
  cfg.validate();
  BatchArray<Scalar> out(batch.rows(), 5);
  std::vector<Eigen::Index> bad;
  std::string first_reason;
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    try {
      out.row(i) = gaussian_to_row(to, row_to_gaussian<Scalar>(from, batch.row(i), cfg), cfg);
    } catch (const std::exception& e) {
      if (bad.empty()) first_reason = e.what();
      bad.push_back(i);
    }
  }
  if (!bad.empty()) throw BatchError(detail::describe_rows("batch_convert", bad, first_reason), bad);
  return out;
}

template <typename Scalar>
struct BatchLossResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> loss;
  BatchArray<Scalar> grad;
};

/// Loss and gradient per row: pred rows are gaucho, gt rows are gaussian.
template <typename Scalar>
BatchLossResult<Scalar> batch_loss_and_grad(const BatchArray<Scalar>& pred, const BatchArray<Scalar>& gt,
                                            const LossConfig<Scalar>& cfg = {}) {
  if (pred.rows() != gt.rows()) throw InvalidInput("batch_loss_and_grad: row counts differ");
  BatchLossResult<Scalar> out{Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(pred.rows()),
                              BatchArray<Scalar>(pred.rows(), 5)};
  std::vector<Eigen::Index> bad;
  std::string first_reason;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    try {
      const GauchoParams<Scalar> p{pred(i, 0), pred(i, 1), pred(i, 2), pred(i, 3), pred(i, 4)};
      Gaussian2<Scalar> g{{gt(i, 0), gt(i, 1)}, gt(i, 2), gt(i, 3), gt(i, 4)};
      out.loss[i] = loss(cholesky_to_gaussian(p), g, cfg);
      out.grad.row(i) = loss_grad(p, g, cfg).transpose();
    } catch (const std::exception& e) {
      if (bad.empty()) first_reason = e.what();
      bad.push_back(i);
    }
  }
  if (!bad.empty()) throw BatchError(detail::describe_rows("batch_loss_and_grad", bad, first_reason), bad);
  return out;
}

}  // namespace gaucho

#endif  // GAUCHO_BATCH_HPP

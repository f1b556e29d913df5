// GauCho detection-head transforms between raw network offsets and
// Cholesky parameters, for anchor-free, axis-aligned anchor and
// oriented-anchor detectors. Every decode has an exact encode inverse used
// for training-target assignment.
#ifndef GAUCHO_HEADS_HPP
#define GAUCHO_HEADS_HPP

#include "gaucho/core.hpp"
#include "gaucho/repr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gaucho {

/// Exponential channels saturate beyond this magnitude.
inline constexpr double kMaxExpOffset = 40.0;

template <typename Scalar>
struct AnchorFreeContext {
  Scalar px = 0, py = 0;
  Scalar t = 1;  // cumulative stride of the feature level
};

template <typename Scalar>
struct AnchorBox {
  Scalar ax = 0, ay = 0, aw = 1, ah = 1;
};

template <typename Scalar>
struct HeadOffsets {
  Scalar dx = 0, dy = 0, d_alpha = 0, d_beta = 0, d_gamma = 0;

  Eigen::Matrix<Scalar, 5, 1> as_vector() const {
    Eigen::Matrix<Scalar, 5, 1> v;
    v << dx, dy, d_alpha, d_beta, d_gamma;
    return v;
  }

  friend bool operator==(const HeadOffsets&, const HeadOffsets&) = default;
};

enum class DeltaMode {
  kDefault,   // delta = sqrt(lambda_min) of the anchor
  kConstant,  // delta = DeltaPolicy::value
};

template <typename Scalar>
struct DeltaPolicy {
  DeltaMode mode = DeltaMode::kDefault;
  Scalar value = 0;
};

/// Oriented anchor (aw, ah, theta) together with its GauCho form.
template <typename Scalar>
class OrientedAnchor {
 public:
  static OrientedAnchor make(const AnchorBox<Scalar>& box, Scalar theta,
                             const ConversionConfig<Scalar>& cfg = {}) {
    const auto obb = ObbLe<Scalar>::canonical(box.ax, box.ay, box.aw, box.ah, theta);
    return OrientedAnchor(box, theta, obb_to_gaucho(obb, cfg));
  }

  const AnchorBox<Scalar>& box() const { return box_; }
  Scalar theta() const { return theta_; }
  const GauchoParams<Scalar>& form() const { return form_; }

 private:
  OrientedAnchor(const AnchorBox<Scalar>& box, Scalar theta, const GauchoParams<Scalar>& form)
      : box_(box), theta_(theta), form_(form) {}

  AnchorBox<Scalar> box_;
  Scalar theta_;
  GauchoParams<Scalar> form_;
};

namespace detail {

template <typename Scalar>
void check_offsets(const HeadOffsets<Scalar>& off, const char* where) {
  if (!all_finite({off.dx, off.dy, off.d_alpha, off.d_beta, off.d_gamma}))
    throw InvalidInput(std::string(where) + ": non-finite offsets");
  for (Scalar d : {off.d_alpha, off.d_beta}) {
    if (std::abs(d) > Scalar(kMaxExpOffset)) {
      std::ostringstream msg;
      msg << where << ": exponential offset " << d << " exceeds +/-" << kMaxExpOffset;
      throw OffsetOverflow(msg.str());
    }
  }
}

template <typename Scalar>
void check_anchor(const AnchorBox<Scalar>& a) {
  if (!all_finite({a.ax, a.ay, a.aw, a.ah}) || !(a.aw > 0) || !(a.ah > 0))
    throw InvalidInput("anchor dimensions must be positive and finite");
}

template <typename Scalar>
void check_target(const GauchoParams<Scalar>& p) {
  if (!all_finite({p.cx, p.cy, p.alpha, p.beta, p.gamma}) || !(p.alpha > 0) || !(p.beta > 0))
    throw InvalidInput("target requires finite parameters with alpha, beta > 0");
}

/// sqrt(s) * max(delta, |aw - ah|): the scale that multiplies the gamma offset.
template <typename Scalar>
Scalar gamma_scale(const AnchorBox<Scalar>& a, const ConversionConfig<Scalar>& cfg,
                   const DeltaPolicy<Scalar>& delta) {
  const Scalar root_s = std::sqrt(cfg.s);
  const Scalar d = delta.mode == DeltaMode::kDefault ? root_s * std::min(a.aw, a.ah) : delta.value;
  return root_s * std::max(d, std::abs(a.aw - a.ah));
}

}  // namespace detail

template <typename Scalar>
GauchoParams<Scalar> decode_anchor_free(const AnchorFreeContext<Scalar>& ctx,
                                        const HeadOffsets<Scalar>& off) {
  if (!(ctx.t > 0)) throw InvalidInput("decode_anchor_free: stride must be positive");
  detail::check_offsets(off, "decode_anchor_free");
  return {ctx.px + ctx.t * off.dx, ctx.py + ctx.t * off.dy, ctx.t * std::exp(off.d_alpha),
          ctx.t * std::exp(off.d_beta), ctx.t * off.d_gamma};
}

template <typename Scalar>
HeadOffsets<Scalar> encode_anchor_free(const AnchorFreeContext<Scalar>& ctx,
                                       const GauchoParams<Scalar>& target) {
  if (!(ctx.t > 0)) throw InvalidInput("encode_anchor_free: stride must be positive");
  detail::check_target(target);
  return {(target.cx - ctx.px) / ctx.t, (target.cy - ctx.py) / ctx.t, std::log(target.alpha / ctx.t),
          std::log(target.beta / ctx.t), target.gamma / ctx.t};
}

template <typename Scalar>
GauchoParams<Scalar> decode_anchor_based(const AnchorBox<Scalar>& anchor, const HeadOffsets<Scalar>& off,
                                         const ConversionConfig<Scalar>& cfg = {},
                                         const DeltaPolicy<Scalar>& delta = {}) {
  cfg.validate();
  detail::check_anchor(anchor);
  detail::check_offsets(off, "decode_anchor_based");
  const Scalar root_s = std::sqrt(cfg.s);
  return {anchor.ax + anchor.aw * off.dx, anchor.ay + anchor.ah * off.dy,
          root_s * anchor.aw * std::exp(off.d_alpha), root_s * anchor.ah * std::exp(off.d_beta),
          detail::gamma_scale(anchor, cfg, delta) * off.d_gamma};
}

template <typename Scalar>
HeadOffsets<Scalar> encode_anchor_based(const AnchorBox<Scalar>& anchor, const GauchoParams<Scalar>& target,
                                        const ConversionConfig<Scalar>& cfg = {},
                                        const DeltaPolicy<Scalar>& delta = {}) {
  cfg.validate();
  detail::check_anchor(anchor);
  detail::check_target(target);
  const Scalar root_s = std::sqrt(cfg.s);
  const Scalar gscale = detail::gamma_scale(anchor, cfg, delta);
  if (!(gscale > 0)) throw DomainError("encode_anchor_based: gamma offset scale is zero");
  return {(target.cx - anchor.ax) / anchor.aw, (target.cy - anchor.ay) / anchor.ah,
          std::log(target.alpha / (root_s * anchor.aw)), std::log(target.beta / (root_s * anchor.ah)),
          target.gamma / gscale};
}

/// Refines an oriented anchor. Zero offsets return the anchor's own GauCho
/// form. Gamma is not clamped to the bound of the refined shape.
template <typename Scalar>
GauchoParams<Scalar> refine_oriented_anchor(const OrientedAnchor<Scalar>& anchor,
                                            const HeadOffsets<Scalar>& off,
                                            const ConversionConfig<Scalar>& cfg = {},
                                            const DeltaPolicy<Scalar>& delta = {}) {
  cfg.validate();
  detail::check_offsets(off, "refine_oriented_anchor");
  const auto& box = anchor.box();
  const auto& f = anchor.form();
  return {f.cx + box.aw * off.dx, f.cy + box.ah * off.dy, f.alpha * std::exp(off.d_alpha),
          f.beta * std::exp(off.d_beta), f.gamma + detail::gamma_scale(box, cfg, delta) * off.d_gamma};
}

template <typename Scalar>
HeadOffsets<Scalar> encode_oriented_anchor(const OrientedAnchor<Scalar>& anchor,
                                           const GauchoParams<Scalar>& target,
                                           const ConversionConfig<Scalar>& cfg = {},
                                           const DeltaPolicy<Scalar>& delta = {}) {
  cfg.validate();
  detail::check_target(target);
  const auto& box = anchor.box();
  const auto& f = anchor.form();
  const Scalar gscale = detail::gamma_scale(box, cfg, delta);
  if (!(gscale > 0)) throw DomainError("encode_oriented_anchor: gamma offset scale is zero");
  return {(target.cx - f.cx) / box.aw, (target.cy - f.cy) / box.ah, std::log(target.alpha / f.alpha),
          std::log(target.beta / f.beta), (target.gamma - f.gamma) / gscale};
}

}  // namespace gaucho

#endif  // GAUCHO_HEADS_HPP

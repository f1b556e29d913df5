// Detection evaluation over oriented shapes: greedy score-ordered matching,
// average precision at IoU thresholds (box or ellipse overlap), orientation
// error statistics and a synthetic-rotation harness.
#ifndef GAUCHO_EVAL_HPP
#define GAUCHO_EVAL_HPP

#include "gaucho/core.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gaucho {

struct GroundTruthRecord {
  std::string image_id;
  std::string category;
  ObbLed shape;
  bool difficult = false;
};

struct DetectionRecord {
  std::string image_id;
  std::string category;
  ObbLed shape;
  double score = 1.0;
};

using IouFn = std::function<double(const ObbLed&, const ObbLed&)>;

enum class IouMode { kObb, kOe };

/// Box IoU, or IoU of the inscribed ellipses.
IouFn make_iou_fn(IouMode mode, double ellipse_tol = 1e-4);

enum class MatchOutcome { kTruePositive, kFalsePositive, kIgnored };

struct MatchOptions {
  bool include_difficult = false;  // treat difficult ground truth as regular
  int threads = 1;
};

struct Matching {
  std::vector<MatchOutcome> outcome;               // per detection, input order
  std::vector<std::optional<std::size_t>> gt_index;  // matched ground truth (input order)
  std::vector<double> iou;                         // IoU with the matched ground truth
};

/// Greedy matching per (image_id, category), detections in descending score
/// order. A detection takes the unmatched ground truth of highest IoU at or
/// above threshold; IoU ties resolve to the earlier ground truth. Detections
/// that only reach difficult ground truth are ignored.
Matching match_detections(std::span<const DetectionRecord> dets, std::span<const GroundTruthRecord> gts,
                          const IouFn& iou, double threshold, const MatchOptions& opts = {});

enum class ApInterpolation { kAllPoints, kVoc11 };

struct ApOptions {
  ApInterpolation interpolation = ApInterpolation::kAllPoints;
  bool include_difficult = false;
  int threads = 1;
};

struct ApReport {
  std::vector<double> thresholds;
  std::map<std::string, std::vector<double>> per_category;  // AP per threshold
  std::vector<double> mean_per_threshold;                    // mean over categories
  double mean_ap = 0.0;                                      // mean over thresholds

  /// AP at a threshold present in `thresholds`.
  double at(double threshold) const;
};

/// 0.50:0.05:0.95.
std::vector<double> coco_thresholds();

ApReport average_precision(std::span<const DetectionRecord> dets, std::span<const GroundTruthRecord> gts,
                           const IouFn& iou, std::span<const double> thresholds, const ApOptions& opts = {});
ApReport average_precision(std::span<const DetectionRecord> dets, std::span<const GroundTruthRecord> gts,
                           IouMode mode, std::span<const double> thresholds, const ApOptions& opts = {});

/// Area under the monotone precision envelope for one ranked list.
/// `hits` marks true positives in rank order; npos is the number of positives.
double ap_from_ranking(std::span<const bool> hits, std::size_t npos,
                       ApInterpolation interp = ApInterpolation::kAllPoints);

struct OrientationBin {
  double lo_deg = 0, hi_deg = 0;
  std::size_t count = 0;
  double mean_abs_err = 0, median_abs_err = 0, q1 = 0, q3 = 0;  // degrees
};

struct OrientationReport {
  std::array<OrientationBin, 10> bins{};
  double aoe = 0, moe = 0, max_err = 0;  // degrees
  std::size_t matched = 0;               // pairs entering the statistics
  std::size_t excluded_ambiguous = 0;    // matched pairs whose ground truth has no orientation
  bool empty = true;
};

/// Orientation error between two long-edge angles, in degrees within [0, 90].
double orientation_error_deg(double theta_a, double theta_b);

struct AnglePair {
  double gt_theta;
  double det_theta;
};

/// Statistics over (gt, det) angle pairs, binned by ground-truth angle.
OrientationReport orientation_report(std::span<const AnglePair> pairs, std::size_t excluded_ambiguous = 0);

OrientationReport orientation_error(std::span<const DetectionRecord> dets, std::span<const GroundTruthRecord> gts,
                                    const IouFn& iou, double iou_threshold, const MatchOptions& opts = {});

using Predictor = std::function<std::vector<DetectionRecord>(std::span<const GroundTruthRecord> rotated,
                                                             double angle_deg)>;

struct HarnessOptions {
  IouFn iou;                                     // defaults to box IoU
  double iou_threshold = 0.5;
  std::map<std::string, Eigen::Vector2d> image_centers;  // rotation pivots; origin if absent
};

struct HarnessReport {
  OrientationReport pooled;
  std::vector<double> evaluated_angles;
  std::vector<double> skipped_angles;
  std::vector<std::string> skip_reasons;
  std::size_t matched_for_iou = 0;  // matched pairs, ambiguous ground truth included
  double max_residual_deg = 0;      // worst orientation error over all matched pairs
};

/// Rotates every ground-truth shape about its image center by each angle,
/// runs the predictor on the rotated set and pools orientation statistics.
/// A predictor that throws for an angle has that angle skipped and recorded.
HarnessReport rotation_harness(std::span<const GroundTruthRecord> gts, std::span<const double> angles_deg,
                               const Predictor& predictor, const HarnessOptions& opts = {});

}  // namespace gaucho

#endif  // GAUCHO_EVAL_HPP

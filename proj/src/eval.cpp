#include "gaucho/eval.hpp"

#include "gaucho/overlap.hpp"
#include "gaucho/repr.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <numeric>
#include <thread>
#include <tuple>

namespace gaucho {

IouFn make_iou_fn(IouMode mode, double ellipse_tol) {
  if (mode == IouMode::kObb) return [](const ObbLed& a, const ObbLed& b) { return obb_iou(a, b); };
  return [ellipse_tol](const ObbLed& a, const ObbLed& b) {
    return ellipse_iou(obb_to_ellipse(a), obb_to_ellipse(b), ellipse_tol);
  };
}

namespace {

// Total order on detections independent of input order.
bool ranks_before(const DetectionRecord& x, const DetectionRecord& y) {
  if (x.score != y.score) return x.score > y.score;
  const auto kx = std::tie(x.image_id, x.category);
  const auto ky = std::tie(y.image_id, y.category);
  if (kx != ky) return kx < ky;
  const std::array<double, 5> px{x.shape.cx(), x.shape.cy(), x.shape.w(), x.shape.h(), x.shape.theta()};
  const std::array<double, 5> py{y.shape.cx(), y.shape.cy(), y.shape.w(), y.shape.h(), y.shape.theta()};
  return px < py;
}

std::vector<std::size_t> ranked_order(std::span<const DetectionRecord> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ranks_before(dets[a], dets[b]); });
  return order;
}

void validate_scores(std::span<const DetectionRecord> dets) {
  for (const auto& d : dets)
    if (!(d.score >= 0.0 && d.score <= 1.0)) throw InvalidInput("detection score must lie in [0, 1]");
}

struct Group {
  std::vector<std::size_t> dets;  // ranked
  std::vector<std::size_t> gts;   // input order
  Eigen::MatrixXd iou;            // dets x gts
};

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

std::vector<Group> build_groups(std::span<const DetectionRecord> dets, std::span<const GroundTruthRecord> gts,
                                const IouFn& iou, int threads) {
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<Group> groups;
  auto group_of = [&](const std::string& image, const std::string& cat) -> Group& {
    auto [it, inserted] = index.try_emplace({image, cat}, groups.size());
    if (inserted) groups.emplace_back();
    return groups[it->second];
  };
  for (std::size_t j = 0; j < gts.size(); ++j) group_of(gts[j].image_id, gts[j].category).gts.push_back(j);
  for (std::size_t i : ranked_order(dets)) group_of(dets[i].image_id, dets[i].category).dets.push_back(i);

  parallel_for(groups.size(), threads, [&](std::size_t g) {
    Group& grp = groups[g];
    grp.iou.resize(static_cast<Eigen::Index>(grp.dets.size()), static_cast<Eigen::Index>(grp.gts.size()));
    for (std::size_t r = 0; r < grp.dets.size(); ++r)
      for (std::size_t c = 0; c < grp.gts.size(); ++c)
        grp.iou(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            iou(dets[grp.dets[r]].shape, gts[grp.gts[c]].shape);
  });
  return groups;
}

Matching greedy_match(const std::vector<Group>& groups, std::size_t n_dets, std::span<const GroundTruthRecord> gts,
                      double threshold, bool include_difficult) {
  Matching m;
  m.outcome.assign(n_dets, MatchOutcome::kFalsePositive);
  m.gt_index.assign(n_dets, std::nullopt);
  m.iou.assign(n_dets, 0.0);
  for (const Group& grp : groups) {
    std::vector<bool> taken(grp.gts.size(), false);
    for (std::size_t r = 0; r < grp.dets.size(); ++r) {
      const std::size_t det = grp.dets[r];
      double best = -1.0;
      std::optional<std::size_t> best_col;
      bool reaches_difficult = false;
      for (std::size_t c = 0; c < grp.gts.size(); ++c) {
        const double v = grp.iou(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        if (v < threshold) continue;
        if (gts[grp.gts[c]].difficult && !include_difficult) {
          reaches_difficult = true;
          continue;
        }
        if (!taken[c] && v > best) {
          best = v;
          best_col = c;
        }
      }
      if (best_col) {
        taken[*best_col] = true;
        m.outcome[det] = MatchOutcome::kTruePositive;
        m.gt_index[det] = grp.gts[*best_col];
        m.iou[det] = best;
      } else if (reaches_difficult) {
        m.outcome[det] = MatchOutcome::kIgnored;
      }
    }
  }
  return m;
}

}  // namespace

Matching match_detections(std::span<const DetectionRecord> dets, std::span<const GroundTruthRecord> gts,
                          const IouFn& iou, double threshold, const MatchOptions& opts) {
  validate_scores(dets);
  const auto groups = build_groups(dets, gts, iou, opts.threads);
  return greedy_match(groups, dets.size(), gts, threshold, opts.include_difficult);
}

double ApReport::at(double threshold) const {
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    if (std::abs(thresholds[i] - threshold) < 1e-9) return mean_per_threshold[i];
  throw InvalidInput("threshold not evaluated in this report");
}

std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back((50.0 + 5.0 * k) / 100.0);
  return t;
}

double ap_from_ranking(std::span<const bool> hits, std::size_t npos, ApInterpolation interp) {
  if (npos == 0) throw DomainError("average precision needs at least one positive");
  const std::size_t n = hits.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += hits[k] ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(npos);
  }
  if (interp == ApInterpolation::kVoc11) {
    double sum = 0.0;
    for (int t = 0; t <= 10; ++t) {
      const double r = t / 10.0;
      double p = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        if (recall[k] >= r) p = std::max(p, precision[k]);
      sum += p;
    }
    return sum / 11.0;
  }
  // Monotone envelope; recall advances by 1/npos at every hit.
  for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (hits[k]) sum += precision[k];
  return sum / static_cast<double>(npos);
}

ApReport average_precision(std::span<const DetectionRecord> dets, std::span<const GroundTruthRecord> gts,
                           const IouFn& iou, std::span<const double> thresholds, const ApOptions& opts) {
  if (gts.empty()) throw DomainError("average precision needs a non-empty ground-truth set");
  if (thresholds.empty()) throw InvalidInput("average precision needs at least one IoU threshold");
  validate_scores(dets);

  std::map<std::string, std::size_t> npos;
  for (const auto& g : gts)
    if (!g.difficult || opts.include_difficult) ++npos[g.category];
  if (npos.empty()) throw DomainError("ground truth contains no non-difficult records");

  const auto groups = build_groups(dets, gts, iou, opts.threads);
  const auto order = ranked_order(dets);

  ApReport report;
  report.thresholds.assign(thresholds.begin(), thresholds.end());
  for (const auto& [cat, _] : npos) report.per_category[cat].reserve(thresholds.size());
  for (double thr : thresholds) {
    const Matching m = greedy_match(groups, dets.size(), gts, thr, opts.include_difficult);
    std::map<std::string, std::vector<bool>> ranking;
    for (std::size_t i : order) {
      if (!npos.contains(dets[i].category) || m.outcome[i] == MatchOutcome::kIgnored) continue;
      ranking[dets[i].category].push_back(m.outcome[i] == MatchOutcome::kTruePositive);
    }
    double sum = 0.0;
    for (const auto& [cat, count] : npos) {
      const auto& hits = ranking[cat];
      const auto buffer = std::make_unique<bool[]>(hits.size());
      std::copy(hits.begin(), hits.end(), buffer.get());
      const double ap = ap_from_ranking({buffer.get(), hits.size()}, count, opts.interpolation);
      report.per_category[cat].push_back(ap);
      sum += ap;
    }
    report.mean_per_threshold.push_back(sum / static_cast<double>(npos.size()));
  }
  report.mean_ap = std::accumulate(report.mean_per_threshold.begin(), report.mean_per_threshold.end(), 0.0) /
                   static_cast<double>(report.mean_per_threshold.size());
  return report;
}

ApReport average_precision(std::span<const DetectionRecord> dets, std::span<const GroundTruthRecord> gts,
                           IouMode mode, std::span<const double> thresholds, const ApOptions& opts) {
  return average_precision(dets, gts, make_iou_fn(mode), thresholds, opts);
}

double orientation_error_deg(double theta_a, double theta_b) {
  return rad_to_deg(axial_angle_distance(theta_a, theta_b));
}

namespace {

// Linear-interpolation quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

OrientationReport orientation_report(std::span<const AnglePair> pairs, std::size_t excluded_ambiguous) {
  OrientationReport rep;
  rep.excluded_ambiguous = excluded_ambiguous;
  std::array<std::vector<double>, 10> per_bin;
  std::vector<double> all;
  all.reserve(pairs.size());
  for (const auto& p : pairs) {
    const double err = orientation_error_deg(p.det_theta, p.gt_theta);
    const double gt_deg = rad_to_deg(wrap_half_turn(p.gt_theta));
    const auto bin = static_cast<std::size_t>(std::clamp(std::floor((gt_deg + 90.0) / 18.0), 0.0, 9.0));
    per_bin[bin].push_back(err);
    all.push_back(err);
  }
  for (std::size_t b = 0; b < 10; ++b) {
    auto& errs = per_bin[b];
    std::sort(errs.begin(), errs.end());
    OrientationBin& out = rep.bins[b];
    out.lo_deg = -90.0 + 18.0 * static_cast<double>(b);
    out.hi_deg = out.lo_deg + 18.0;
    out.count = errs.size();
    out.mean_abs_err = mean_of(errs);
    out.median_abs_err = quantile(errs, 0.5);
    out.q1 = quantile(errs, 0.25);
    out.q3 = quantile(errs, 0.75);
  }
  std::sort(all.begin(), all.end());
  rep.matched = all.size();
  rep.empty = all.empty();
  rep.aoe = mean_of(all);
  rep.moe = quantile(all, 0.5);
  rep.max_err = all.empty() ? 0.0 : all.back();
  return rep;
}

namespace {

void collect_pairs(std::span<const DetectionRecord> dets, std::span<const GroundTruthRecord> gts,
                   const Matching& m, std::vector<AnglePair>& pairs, std::size_t& excluded, std::size_t& matched) {
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (m.outcome[i] != MatchOutcome::kTruePositive) continue;
    ++matched;
    const auto& gt = gts[*m.gt_index[i]];
    if (gt.shape.ambiguous_angle()) {
      ++excluded;
      continue;
    }
    pairs.push_back({gt.shape.theta(), dets[i].shape.theta()});
  }
}

}  // namespace

OrientationReport orientation_error(std::span<const DetectionRecord> dets, std::span<const GroundTruthRecord> gts,
                                    const IouFn& iou, double iou_threshold, const MatchOptions& opts) {
  const Matching m = match_detections(dets, gts, iou, iou_threshold, opts);
  std::vector<AnglePair> pairs;
  std::size_t excluded = 0, matched = 0;
  collect_pairs(dets, gts, m, pairs, excluded, matched);
  return orientation_report(pairs, excluded);
}

HarnessReport rotation_harness(std::span<const GroundTruthRecord> gts, std::span<const double> angles_deg,
                               const Predictor& predictor, const HarnessOptions& opts) {
  if (angles_deg.empty()) throw InvalidInput("rotation harness needs at least one angle");
  const IouFn iou = opts.iou ? opts.iou : make_iou_fn(IouMode::kObb);
  HarnessReport rep;
  std::vector<AnglePair> pairs;
  std::size_t excluded = 0;
  for (double angle : angles_deg) {
    const double phi = deg_to_rad(angle);
    std::vector<GroundTruthRecord> rotated(gts.begin(), gts.end());
    for (auto& g : rotated) {
      const auto it = opts.image_centers.find(g.image_id);
      const Eigen::Vector2d pivot = it == opts.image_centers.end() ? Eigen::Vector2d::Zero() : it->second;
      g.shape = rotate_obb(g.shape, phi, pivot);
    }
    std::vector<DetectionRecord> dets;
    try {
      dets = predictor(rotated, angle);
    } catch (const std::exception& e) {
      rep.skipped_angles.push_back(angle);
      rep.skip_reasons.emplace_back(e.what());
      continue;
    }
    const Matching m = match_detections(dets, rotated, iou, opts.iou_threshold);
    collect_pairs(dets, rotated, m, pairs, excluded, rep.matched_for_iou);
    rep.evaluated_angles.push_back(angle);
  }
  rep.pooled = orientation_report(pairs, excluded);
  rep.max_residual_deg = rep.pooled.max_err;
  return rep;
}

}  // namespace gaucho

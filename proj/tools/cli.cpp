#include "cli.hpp"

#include "gaucho/bounds_suite.hpp"
#include "gaucho/eval.hpp"
#include "gaucho/io.hpp"
#include "gaucho/losses.hpp"
#include "gaucho/overlap.hpp"
#include "gaucho/repr.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace gaucho::cli {

namespace {

namespace fs = std::filesystem;

struct CliFailure : std::runtime_error {
  CliFailure(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

[[noreturn]] void fail(int code, const std::string& what) { throw CliFailure(code, what); }

std::string num(double x, int precision = 12) {
  if (x == 0.0) x = 0.0;
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

std::string fixed(double x, int digits) {
  if (x == 0.0) x = 0.0;
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

std::vector<double> parse_list(const std::string& text, const char* flag, std::size_t expected = 0) {
  std::vector<double> values;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      fail(kUsage, std::string(flag) + ": cannot parse '" + item + "' as a number");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
      fail(kUsage, std::string(flag) + ": cannot parse '" + item + "' as a number");
    values.push_back(v);
  }
  if (values.empty() || (expected && values.size() != expected))
    fail(kUsage, std::string(flag) + ": expected " + (expected ? std::to_string(expected) : "one or more") +
                     " comma-separated numbers");
  return values;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(kIoError, "cannot read " + path);
  return in;
}

// Writes to a file, or to `fallback` when the path is empty or "-".
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) fail(kIoError, "cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }
  void close(const std::string& path) {
    stream_->flush();
    if (!*stream_) fail(kIoError, "write failed for " + (path.empty() ? std::string("stdout") : path));
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void report_issues(const std::string& path, const std::vector<io::ParseIssue>& issues, std::ostream& err) {
  for (const auto& is : issues) err << path << ":" << is.line << ": " << is.message << "\n";
}

ConversionConfigd conversion(double s) {
  ConversionConfigd cfg{s};
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    fail(kUsage, std::string("--s: ") + e.what());
  }
  return cfg;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("GAUCHO_SEED")) {
    const std::string text(env);
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) fail(kUsage, "GAUCHO_SEED must be an unsigned integer");
    return v;
  }
  return 7;
}

// --- convert ---------------------------------------------------------------

struct ConvertArgs {
  std::string input, output, from, to;
  double s = 0.25;
};

int cmd_convert(const ConvertArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = conversion(a.s);
  const auto to = *io::shape_kind_from_key(a.to);
  auto in = open_input(a.input);
  std::vector<std::pair<std::size_t, io::ShapeRecord>> records;  // with source line
  std::vector<io::ParseIssue> issues;
  if (a.from == "dota") {
    auto parsed = io::parse_dota(in);
    issues = std::move(parsed.issues);
    const std::string image_id = fs::path(a.input).stem().string();
    for (const auto& ann : parsed.records) {
      io::ShapeRecord rec;
      rec.image_id = image_id;
      rec.category = ann.category;
      rec.difficult = ann.difficult;
      rec.values = io::shape_values(io::dota_to_obb(ann), io::ShapeKind::kObb, cfg);
      records.emplace_back(ann.line, std::move(rec));
    }
  } else {
    const auto from = *io::shape_kind_from_key(a.from);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        auto rec = io::parse_record_line(line);
        if (rec.kind != from)
          throw InvalidInput(std::string("record carries '") + io::shape_key(rec.kind) + "', expected '" + a.from +
                             "'");
        records.emplace_back(n, std::move(rec));
      } catch (const std::exception& e) {
        issues.push_back({n, e.what()});
      }
    }
  }
  if (in.bad()) fail(kIoError, "read failed for " + a.input);

  Output sink(a.output, out);
  for (const auto& [line, rec] : records) {
    try {
      sink.get() << io::format_record(io::convert_record(rec, to, cfg)) << "\n";
    } catch (const std::exception& e) {
      issues.push_back({line, std::string("conversion failed: ") + e.what()});
    }
  }
  sink.close(a.output);
  std::sort(issues.begin(), issues.end(), [](const auto& x, const auto& y) { return x.line < y.line; });
  report_issues(a.input, issues, err);
  return issues.empty() ? kOk : kPartialParse;
}

// --- landscape -------------------------------------------------------------

struct LandscapeArgs {
  std::string gt, dims, loss = "kld", output, transform = "raw", kld_direction = "pred_to_gt";
  int steps = 360;
  double s = 0.25, tau = 1.0;
  bool trace = false;
};

LossConfig<double> loss_config(const std::string& kind, const std::string& transform, const std::string& dir,
                               double tau) {
  LossConfig<double> cfg;
  cfg.kind = kind == "gwd" ? LossKind::kGwd : kind == "kld" ? LossKind::kKld : LossKind::kProbIou;
  cfg.transform = transform == "raw" ? LossTransform::kRawDistance : LossTransform::kLogSaturating;
  cfg.kld_direction = dir == "pred_to_gt"   ? KldDirection::kPredToGt
                      : dir == "gt_to_pred" ? KldDirection::kGtToPred
                                            : KldDirection::kSymmetric;
  if (!(tau >= 0)) fail(kUsage, "--tau must be non-negative");
  cfg.tau = tau;
  return cfg;
}

int cmd_landscape(const LandscapeArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = conversion(a.s);
  const auto gt_vals = parse_list(a.gt, "--gt", 3);
  if (!(gt_vals[0] > 0 && gt_vals[1] > 0)) fail(kUsage, "--gt: dimensions must be positive");
  const auto gt = ObbLed::canonical(0.0, 0.0, gt_vals[0], gt_vals[1], deg_to_rad(gt_vals[2]));

  Output sink(a.output, out);
  std::ostream& csv = sink.get();
  if (a.trace) {
    if (a.steps < 2) fail(kUsage, "--steps must be at least 2 in trace mode");
    const auto rows = parametrization_trace(gt, a.steps, cfg);
    csv << "rotation_deg,le_w,le_h,le_theta_deg,a,b,c,alpha,beta,gamma\n";
    for (const auto& r : rows) {
      csv << num(rad_to_deg(r.rotation)) << "," << num(r.le.w()) << "," << num(r.le.h()) << ","
          << num(rad_to_deg(r.le.theta())) << "," << num(r.covariance[0]) << "," << num(r.covariance[1]) << ","
          << num(r.covariance[2]) << "," << num(r.cholesky[0]) << "," << num(r.cholesky[1]) << ","
          << num(r.cholesky[2]) << "\n";
    }
    sink.close(a.output);
    const auto sum = summarize_trace(rows, cfg);
    err << "le_jumps: " << sum.le_jump_rotations.size();
    for (double r : sum.le_jump_rotations) err << " at " << fixed(rad_to_deg(r), 3) << " deg";
    err << "\ncovariance_max_step: " << num(sum.max_covariance_step) << " (bound " << num(sum.covariance_step_bound)
        << ")\ncholesky_max_step: " << num(sum.max_cholesky_step) << "\n";
    return kOk;
  }

  if (a.dims.empty()) fail(kUsage, "--dims is required unless --trace is given");
  const auto dims = parse_list(a.dims, "--dims", 2);
  if (!(dims[0] > 0 && dims[1] > 0)) fail(kUsage, "--dims: dimensions must be positive");
  if (a.steps < 16) fail(kUsage, "--steps must be at least 16");
  const auto lc = loss_config(a.loss, a.transform, a.kld_direction, a.tau);
  const auto land = sweep_landscape(gt, dims[0], dims[1], lc, cfg, a.steps);
  csv << "theta_deg,loss,kind\n";
  for (const auto& smp : land.sweep) csv << num(rad_to_deg(smp.theta)) << "," << num(smp.loss, 17) << ",sample\n";
  for (const auto& m : land.minima) {
    csv << num(rad_to_deg(m.theta)) << "," << num(m.loss, 17) << "," << (m.is_global ? "global_min" : "local_min")
        << "\n";
    err << (m.is_global ? "global" : "local") << " minimum at " << fixed(rad_to_deg(m.theta), 3)
        << " deg, loss " << num(m.loss) << "\n";
  }
  sink.close(a.output);
  return kOk;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string gt, pred, mode = "obb", thresholds, json, gt_format = "auto", interp = "all";
  bool orientation = false, include_difficult = false;
  double s = 0.25, orientation_iou = 0.5;
  int threads = 1;
};

template <typename Record>
std::vector<Record> load_jsonl(const std::string& path, const ConversionConfigd& cfg, std::ostream& err,
                               bool& partial, Record (*convert)(const io::ShapeRecord&, const ConversionConfigd&)) {
  auto in = open_input(path);
  auto parsed = io::parse_records(in);
  if (in.bad()) fail(kIoError, "read failed for " + path);
  report_issues(path, parsed.issues, err);
  partial = partial || !parsed.issues.empty();
  std::vector<Record> out;
  for (const auto& r : parsed.records) out.push_back(convert(r, cfg));
  return out;
}

std::vector<GroundTruthRecord> load_ground_truth(const EvalArgs& a, const ConversionConfigd& cfg, std::ostream& err,
                                                 bool& partial) {
  const bool dota = a.gt_format == "dota" || (a.gt_format == "auto" && fs::path(a.gt).extension() == ".txt");
  if (!dota) return load_jsonl<GroundTruthRecord>(a.gt, cfg, err, partial, &io::to_ground_truth);
  auto in = open_input(a.gt);
  auto parsed = io::parse_dota(in);
  report_issues(a.gt, parsed.issues, err);
  partial = partial || !parsed.issues.empty();
  std::vector<GroundTruthRecord> out;
  const std::string image_id = fs::path(a.gt).stem().string();
  for (const auto& ann : parsed.records) out.push_back({image_id, ann.category, io::dota_to_obb(ann), ann.difficult});
  return out;
}

nlohmann::ordered_json orientation_json(const OrientationReport& rep) {
  nlohmann::ordered_json j;
  j["matched"] = rep.matched;
  j["excluded_ambiguous"] = rep.excluded_ambiguous;
  j["empty"] = rep.empty;
  j["aoe_deg"] = rep.aoe;
  j["moe_deg"] = rep.moe;
  j["max_err_deg"] = rep.max_err;
  auto bins = nlohmann::ordered_json::array();
  for (const auto& b : rep.bins) {
    nlohmann::ordered_json jb;
    jb["lo_deg"] = b.lo_deg;
    jb["hi_deg"] = b.hi_deg;
    jb["count"] = b.count;
    jb["mean_abs_err_deg"] = b.mean_abs_err;
    jb["median_abs_err_deg"] = b.median_abs_err;
    jb["q1_deg"] = b.q1;
    jb["q3_deg"] = b.q3;
    bins.push_back(std::move(jb));
  }
  j["bins"] = std::move(bins);
  return j;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = conversion(a.s);
  if (a.threads < 1) fail(kUsage, "--threads must be at least 1");
  std::vector<double> thresholds = a.thresholds.empty() ? coco_thresholds() : parse_list(a.thresholds, "--thresholds");
  for (double t : thresholds)
    if (!(t > 0.0 && t <= 1.0)) fail(kUsage, "--thresholds: values must lie in (0, 1]");

  bool partial = false;
  const auto gts = load_ground_truth(a, cfg, err, partial);
  const auto dets = load_jsonl<DetectionRecord>(a.pred, cfg, err, partial, &io::to_detection);
  if (gts.empty()) fail(kBadData, "ground truth is empty: " + a.gt);

  ApOptions opts;
  opts.interpolation = a.interp == "voc11" ? ApInterpolation::kVoc11 : ApInterpolation::kAllPoints;
  opts.include_difficult = a.include_difficult;
  opts.threads = a.threads;
  const IouFn iou = make_iou_fn(a.mode == "oe" ? IouMode::kOe : IouMode::kObb);
  ApReport ap;
  try {
    ap = average_precision(dets, gts, iou, thresholds, opts);
  } catch (const DomainError& e) {
    fail(kBadData, e.what());
  }

  out << "mode: " << a.mode << "\n";
  out << "threshold  mean";
  for (const auto& [cat, _] : ap.per_category) out << "  " << cat;
  out << "\n";
  for (std::size_t i = 0; i < ap.thresholds.size(); ++i) {
    out << fixed(ap.thresholds[i], 2) << "       " << fixed(ap.mean_per_threshold[i], 6);
    for (const auto& [cat, v] : ap.per_category) out << "  " << fixed(v[i], 6);
    out << "\n";
  }
  out << "mean_ap: " << fixed(ap.mean_ap, 6) << "\n";

  std::optional<OrientationReport> orient;
  if (a.orientation) {
    orient = orientation_error(dets, gts, iou, a.orientation_iou,
                               MatchOptions{a.include_difficult, a.threads});
    out << "orientation: matched " << orient->matched << ", excluded_ambiguous " << orient->excluded_ambiguous
        << "\n";
    if (orient->empty) {
      out << "orientation: no matched pairs\n";
    } else {
      out << "aoe_deg: " << fixed(orient->aoe, 4) << "\nmoe_deg: " << fixed(orient->moe, 4) << "\n";
      for (const auto& b : orient->bins)
        out << "bin [" << fixed(b.lo_deg, 0) << ", " << fixed(b.hi_deg, 0) << "): n=" << b.count
            << " mean=" << fixed(b.mean_abs_err, 4) << " median=" << fixed(b.median_abs_err, 4) << "\n";
    }
  }

  if (!a.json.empty()) {
    nlohmann::ordered_json j;
    j["mode"] = a.mode;
    j["interpolation"] = a.interp;
    j["thresholds"] = ap.thresholds;
    j["mean_per_threshold"] = ap.mean_per_threshold;
    j["mean_ap"] = ap.mean_ap;
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (const auto& [cat, v] : ap.per_category) per[cat] = v;
    j["per_category"] = std::move(per);
    if (orient) j["orientation"] = orientation_json(*orient);
    Output sink(a.json, out);
    sink.get() << j.dump(2) << "\n";
    sink.close(a.json);
  }
  return partial ? kPartialParse : kOk;
}

// --- bounds-check ----------------------------------------------------------

struct BoundsArgs {
  std::size_t samples = 100000;
  std::optional<std::uint64_t> seed;
  bool force_square = false;
};

int cmd_bounds(const BoundsArgs& a, std::ostream& out, std::ostream& err) {
  if (a.samples < 1) fail(kUsage, "--samples must be at least 1");
  BoundsSuiteOptions opts;
  opts.samples = a.samples;
  opts.seed = resolve_seed(a.seed);
  opts.force_square = a.force_square;
  const auto rep = run_bounds_suite(opts);
  out << "samples: " << rep.samples << "\nseed: " << opts.seed << "\ntightness_checked: " << rep.tightness_checked
      << "\nmax_tightness_gap: " << num(rep.max_tightness_gap) << "\nviolations: " << rep.violations.size() << "\n";
  const std::size_t shown = std::min<std::size_t>(rep.violations.size(), 50);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& v = rep.violations[i];
    err << "violation: " << v.check << " value=" << num(v.value, 17) << " bound=" << num(v.bound, 17)
        << " reproduce: seed=" << opts.seed << " index=" << v.sample.index << " w=" << num(v.sample.w, 17)
        << " h=" << num(v.sample.h, 17) << " theta_deg=" << num(rad_to_deg(v.sample.theta), 17)
        << " s=" << num(v.sample.s, 17) << "\n";
  }
  if (shown < rep.violations.size()) err << "... " << rep.violations.size() - shown << " more\n";
  out << (rep.passed() ? "PASS" : "FAIL") << "\n";
  return rep.passed() ? kOk : kPropertyFailure;
}

// --- mask-iou --------------------------------------------------------------

struct MaskArgs {
  std::string ann, masks, output;
  int resolution = 512;
  double s = 0.25;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_mask_iou(const MaskArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = conversion(a.s);
  if (a.resolution < 64) fail(kUsage, "--resolution must be at least 64");
  auto ann_in = open_input(a.ann);
  auto mask_in = open_input(a.masks);
  const auto anns = io::parse_records(ann_in);
  const auto masks = io::parse_masks(mask_in);
  report_issues(a.ann, anns.issues, err);
  report_issues(a.masks, masks.issues, err);
  if (masks.records.empty()) fail(kBadData, "no mask records in " + a.masks);
  if (anns.records.empty()) fail(kBadData, "no annotation records in " + a.ann);

  using Key = std::tuple<std::string, std::string, std::string>;
  auto keyed = [](const auto& records) {
    std::vector<Key> keys;
    std::map<std::pair<std::string, std::string>, std::size_t> ordinal;
    for (const auto& r : records) {
      const std::size_t k = ordinal[{r.image_id, r.category}]++;
      keys.emplace_back(r.image_id, r.category, r.record_id.value_or(std::to_string(k)));
    }
    return keys;
  };
  const auto ann_keys = keyed(anns.records);
  const auto mask_keys = keyed(masks.records);
  std::map<Key, std::size_t> mask_index;
  for (std::size_t i = 0; i < mask_keys.size(); ++i) mask_index.emplace(mask_keys[i], i);

  Output sink(a.output, out);
  std::ostream& csv = sink.get();
  csv << "record_id,category,iou_obb,iou_oe\n";
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_cat;
  for (std::size_t i = 0; i < anns.records.size(); ++i) {
    const auto& [image, cat, rid] = ann_keys[i];
    const auto it = mask_index.find(ann_keys[i]);
    if (it == mask_index.end()) {
      err << "warning: no mask for " << image << "/" << cat << "/" << rid << ", skipped\n";
      continue;
    }
    const auto& polys = masks.records[it->second].polygons;
    const ObbLed obb = io::record_obb(anns.records[i], cfg);
    double iou_obb = 0, iou_oe = 0;
    try {
      iou_obb = shape_mask_iou(MaskShape(obb), polys, a.resolution);
      iou_oe = shape_mask_iou(MaskShape(obb_to_ellipse(obb)), polys, a.resolution);
    } catch (const std::exception& e) {
      err << "warning: " << image << "/" << cat << "/" << rid << ": " << e.what() << ", skipped\n";
      continue;
    }
    csv << image << "/" << rid << "," << cat << "," << fixed(iou_obb, 6) << "," << fixed(iou_oe, 6) << "\n";
    per_cat[cat].first.push_back(iou_obb);
    per_cat[cat].second.push_back(iou_oe);
  }
  for (const auto& [cat, v] : per_cat)
    csv << "median," << cat << "," << fixed(median(v.first), 6) << "," << fixed(median(v.second), 6) << "\n";
  sink.close(a.output);
  if (per_cat.empty()) fail(kBadData, "no annotation matched a mask");
  const bool partial = !anns.issues.empty() || !masks.issues.empty();
  return partial ? kPartialParse : kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Oriented-object representation toolkit: conversions, loss landscapes, evaluation."};
  app.name("gaucho");
  app.require_subcommand(1);

  const std::vector<std::string> from_kinds{"dota", "obb", "gaucho", "ellipse", "gaussian"};
  const std::vector<std::string> to_kinds{"obb", "gaucho", "ellipse", "gaussian"};
  const std::vector<std::string> loss_kinds{"gwd", "kld", "probiou"};

  ConvertArgs conv;
  auto* convert = app.add_subcommand("convert", "Convert annotation records between shape forms (JSONL out)");
  convert->add_option("input", conv.input, "Input file")->required();
  convert->add_option("--from", conv.from, "Input format")->required()->check(CLI::IsMember(from_kinds));
  convert->add_option("--to", conv.to, "Output shape form")->required()->check(CLI::IsMember(to_kinds));
  convert->add_option("--s", conv.s, "Scaling factor")->capture_default_str();
  convert->add_option("-o,--out", conv.output, "Output file (default stdout)");

  LandscapeArgs land;
  auto* landscape = app.add_subcommand("landscape", "Loss over candidate angle, or a parametrization trace (CSV)");
  landscape->add_option("--gt", land.gt, "Ground truth w,h,theta_deg")->required();
  landscape->add_option("--dims", land.dims, "Candidate w,h");
  landscape->add_option("--loss", land.loss, "Loss kind")->check(CLI::IsMember(loss_kinds))->capture_default_str();
  landscape->add_option("--steps", land.steps, "Angle samples over [-90, 90)")->capture_default_str();
  landscape->add_option("--transform", land.transform, "raw or log")
      ->check(CLI::IsMember({"raw", "log"}))
      ->capture_default_str();
  landscape->add_option("--tau", land.tau, "Constant of the log transform")->capture_default_str();
  landscape->add_option("--kld-direction", land.kld_direction, "KLD direction")
      ->check(CLI::IsMember({"pred_to_gt", "gt_to_pred", "symmetric"}))
      ->capture_default_str();
  landscape->add_option("--s", land.s, "Scaling factor")->capture_default_str();
  landscape->add_option("-o,--out", land.output, "CSV output (default stdout)");
  landscape->add_flag("--trace", land.trace, "Rotate the ground truth and trace LE, covariance and Cholesky tuples");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Average precision and orientation error");
  eval->add_option("--gt", ev.gt, "Ground-truth JSONL, or DOTA text")->required();
  eval->add_option("--pred", ev.pred, "Detection JSONL")->required();
  eval->add_option("--mode", ev.mode, "IoU on boxes or ellipses")
      ->check(CLI::IsMember({"obb", "oe"}))
      ->capture_default_str();
  eval->add_option("--thresholds", ev.thresholds, "Comma-separated IoU thresholds (default 0.50:0.05:0.95)");
  eval->add_option("--gt-format", ev.gt_format, "auto, jsonl or dota")
      ->check(CLI::IsMember({"auto", "jsonl", "dota"}))
      ->capture_default_str();
  eval->add_option("--interp", ev.interp, "all (all points) or voc11")
      ->check(CLI::IsMember({"all", "voc11"}))
      ->capture_default_str();
  eval->add_flag("--orientation", ev.orientation, "Also report orientation error");
  eval->add_option("--orientation-iou", ev.orientation_iou, "IoU threshold for orientation matching")
      ->capture_default_str();
  eval->add_flag("--include-difficult", ev.include_difficult, "Score difficult ground truth like any other");
  eval->add_option("--json", ev.json, "Write a JSON report to this path ('-' for stdout)");
  eval->add_option("--threads", ev.threads, "Worker threads for IoU")->capture_default_str();
  eval->add_option("--s", ev.s, "Scaling factor for gaucho/gaussian records")->capture_default_str();

  BoundsArgs bnd;
  auto* bounds = app.add_subcommand("bounds-check", "Randomized covariance and Cholesky bound suite");
  bounds->add_option("--samples", bnd.samples, "Number of samples")->capture_default_str();
  bounds->add_option("--seed", bnd.seed, "Seed (default $GAUCHO_SEED, else 7)");
  bounds->add_flag("--force-square", bnd.force_square, "Draw squares only");

  MaskArgs mk;
  auto* mask = app.add_subcommand("mask-iou", "IoU of boxes and their ellipses against polygon masks (CSV)");
  mask->add_option("--ann", mk.ann, "Annotation JSONL")->required();
  mask->add_option("--masks", mk.masks, "Mask polygon JSONL")->required();
  mask->add_option("--resolution", mk.resolution, "Raster cells per axis")->capture_default_str();
  mask->add_option("--s", mk.s, "Scaling factor for gaucho/gaussian records")->capture_default_str();
  mask->add_option("-o,--out", mk.output, "CSV output (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*convert) return cmd_convert(conv, out, err);
    if (*landscape) return cmd_landscape(land, out, err);
    if (*eval) return cmd_eval(ev, out, err);
    if (*bounds) return cmd_bounds(bnd, out, err);
    if (*mask) return cmd_mask_iou(mk, out, err);
  } catch (const CliFailure& e) {
    err << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kBadData;
  }
  return kUsage;
}

}  // namespace gaucho::cli

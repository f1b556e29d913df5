#include "gaucho/io.hpp"

#include "gaucho/repr.hpp"

#include <json.hpp>

#include <cctype>
#include <sstream>

namespace gaucho::io {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

bool numeric_leading(const std::string& line) {
  std::istringstream s(line);
  std::string tok;
  if (!(s >> tok)) return false;
  std::size_t used = 0;
  try {
    (void)std::stod(tok, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == tok.size();
}

double cross(const Point& o, const Point& a, const Point& b) {
  return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

bool segments_cross(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double finite_number(const Json& v, const char* what) {
  if (!v.is_number()) throw InvalidInput(std::string(what) + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InvalidInput(std::string(what) + ": non-finite value");
  return x;
}

double angle_rad(double deg) {
  if (!(deg >= -90.0 && deg < 90.0)) throw InvalidInput("theta_deg must lie in [-90, 90)");
  return deg_to_rad(deg);
}

double clean(double x) { return x == 0.0 ? 0.0 : x; }

template <typename T>
Parsed<T> parse_lines(std::istream& in, T (*parse)(const Json&)) {
  Parsed<T> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.records.push_back(parse(Json::parse(line)));
    } catch (const std::exception& e) {
      out.issues.push_back({n, e.what()});
    }
  }
  return out;
}

ShapeRecord record_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("record must be a JSON object");
  ShapeRecord rec;
  if (!j.contains("image_id") || !j.contains("category")) throw InvalidInput("record needs image_id and category");
  rec.image_id = j.at("image_id").is_string() ? j.at("image_id").get<std::string>() : j.at("image_id").dump();
  rec.category = j.at("category").is_string() ? j.at("category").get<std::string>() : j.at("category").dump();

  int found = 0;
  for (ShapeKind k : {ShapeKind::kObb, ShapeKind::kGaucho, ShapeKind::kEllipse, ShapeKind::kGaussian}) {
    if (!j.contains(shape_key(k))) continue;
    ++found;
    const Json& arr = j.at(shape_key(k));
    if (!arr.is_array() || arr.size() != 5) throw InvalidInput(std::string(shape_key(k)) + " needs 5 numbers");
    rec.kind = k;
    for (std::size_t i = 0; i < 5; ++i) rec.values[i] = finite_number(arr[i], shape_key(k));
  }
  if (found != 1) throw InvalidInput("record needs exactly one of obb, gaucho, ellipse, gaussian");

  if (j.contains("score")) {
    rec.score = finite_number(j.at("score"), "score");
    if (*rec.score < 0.0 || *rec.score > 1.0) throw InvalidInput("score must lie in [0, 1]");
  }
  if (j.contains("difficult")) {
    const Json& d = j.at("difficult");
    if (d.is_boolean()) rec.difficult = d.get<bool>();
    else if (d.is_number_integer() && (d.get<long>() == 0 || d.get<long>() == 1)) rec.difficult = d.get<long>() == 1;
    else throw InvalidInput("difficult must be a boolean or 0/1");
  }
  if (j.contains("record_id")) {
    const Json& r = j.at("record_id");
    rec.record_id = r.is_string() ? r.get<std::string>() : r.dump();
  }
  // Validate the shape itself so bad geometry is reported at parse time.
  (void)record_gaussian(rec);
  return rec;
}

MaskRecord mask_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("mask must be a JSON object");
  MaskRecord m;
  if (!j.contains("image_id") || !j.contains("category")) throw InvalidInput("mask needs image_id and category");
  m.image_id = j.at("image_id").is_string() ? j.at("image_id").get<std::string>() : j.at("image_id").dump();
  m.category = j.at("category").is_string() ? j.at("category").get<std::string>() : j.at("category").dump();
  if (j.contains("record_id")) {
    const Json& r = j.at("record_id");
    m.record_id = r.is_string() ? r.get<std::string>() : r.dump();
  }
  if (!j.contains("polygons") || !j.at("polygons").is_array()) throw InvalidInput("mask needs a polygons array");
  for (const Json& poly : j.at("polygons")) {
    if (!poly.is_array() || poly.size() < 3) throw InvalidInput("mask polygon needs at least 3 vertices");
    Polygon p;
    for (const Json& v : poly) {
      if (!v.is_array() || v.size() != 2) throw InvalidInput("mask vertex must be [x, y]");
      p.emplace_back(finite_number(v[0], "vertex"), finite_number(v[1], "vertex"));
    }
    m.polygons.push_back(std::move(p));
  }
  if (m.polygons.empty()) throw InvalidInput("mask has no polygons");
  return m;
}

}  // namespace

Parsed<DotaAnnotation> parse_dota(std::istream& in) {
  Parsed<DotaAnnotation> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!numeric_leading(line)) continue;
    std::istringstream s(line);
    std::vector<std::string> tok;
    for (std::string t; s >> t;) tok.push_back(t);
    if (tok.size() < 9 || tok.size() > 10) {
      out.issues.push_back({n, "expected 8 coordinates, a category and an optional difficult flag"});
      continue;
    }
    try {
      DotaAnnotation ann;
      ann.line = n;
      for (int i = 0; i < 4; ++i) {
        std::size_t ux = 0, uy = 0;
        const double x = std::stod(tok[2 * i], &ux), y = std::stod(tok[2 * i + 1], &uy);
        if (ux != tok[2 * i].size() || uy != tok[2 * i + 1].size() || !std::isfinite(x) || !std::isfinite(y))
          throw InvalidInput("malformed coordinate");
        ann.corners[i] = Point(x, y);
      }
      ann.category = tok[8];
      if (tok.size() == 10) {
        if (tok[9] != "0" && tok[9] != "1") throw InvalidInput("difficult flag must be 0 or 1");
        ann.difficult = tok[9] == "1";
      }
      (void)dota_to_obb(ann);
      out.records.push_back(std::move(ann));
    } catch (const std::exception& e) {
      out.issues.push_back({n, e.what()});
    }
  }
  return out;
}

ObbLed dota_to_obb(const DotaAnnotation& ann) {
  const auto& c = ann.corners;
  if (segments_cross(c[0], c[1], c[2], c[3]) || segments_cross(c[1], c[2], c[3], c[0]))
    throw InvalidInput("quadrilateral is self-intersecting");
  if (std::abs(signed_area(c)) <= 0.0) throw InvalidInput("quadrilateral has zero area");
  return min_area_rect(c);
}

const char* shape_key(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kObb: return "obb";
    case ShapeKind::kGaucho: return "gaucho";
    case ShapeKind::kEllipse: return "ellipse";
    case ShapeKind::kGaussian: return "gaussian";
  }
  return "";
}

std::optional<ShapeKind> shape_kind_from_key(const std::string& key) {
  for (ShapeKind k : {ShapeKind::kObb, ShapeKind::kGaucho, ShapeKind::kEllipse, ShapeKind::kGaussian})
    if (key == shape_key(k)) return k;
  return std::nullopt;
}

ShapeRecord parse_record_line(const std::string& line) { return record_from_json(Json::parse(line)); }

Parsed<ShapeRecord> parse_records(std::istream& in) { return parse_lines<ShapeRecord>(in, &record_from_json); }

std::string format_record(const ShapeRecord& rec) {
  OrderedJson j;
  j["image_id"] = rec.image_id;
  j["category"] = rec.category;
  if (rec.record_id) j["record_id"] = *rec.record_id;
  OrderedJson arr = OrderedJson::array();
  for (double v : rec.values) arr.push_back(clean(v));
  j[shape_key(rec.kind)] = std::move(arr);
  if (rec.score) j["score"] = *rec.score;
  if (rec.difficult) j["difficult"] = 1;
  return j.dump();
}

Gaussian2d record_gaussian(const ShapeRecord& rec, const ConversionConfigd& cfg) {
  const auto& v = rec.values;
  switch (rec.kind) {
    case ShapeKind::kObb:
      return obb_to_gaussian(ObbLed::canonical(v[0], v[1], v[2], v[3], angle_rad(v[4])), cfg);
    case ShapeKind::kEllipse:
      return ellipse_to_gaussian(OrientedEllipsed::canonical(v[0], v[1], v[2], v[3], angle_rad(v[4])), cfg);
    case ShapeKind::kGaucho:
      return cholesky_to_gaussian(GauchoParamsd{v[0], v[1], v[2], v[3], v[4]});
    case ShapeKind::kGaussian: {
      const Gaussian2d g{{v[0], v[1]}, v[2], v[3], v[4]};
      require_positive_definite(g, "gaussian record");
      return g;
    }
  }
  throw InvalidInput("unknown shape kind");
}

ObbLed record_obb(const ShapeRecord& rec, const ConversionConfigd& cfg) {
  const auto& v = rec.values;
  switch (rec.kind) {
    case ShapeKind::kObb: return ObbLed::canonical(v[0], v[1], v[2], v[3], angle_rad(v[4]));
    case ShapeKind::kEllipse:
      return ellipse_to_obb(OrientedEllipsed::canonical(v[0], v[1], v[2], v[3], angle_rad(v[4])));
    default: return gaussian_to_obb(record_gaussian(rec, cfg), cfg);
  }
}

OrientedEllipsed record_ellipse(const ShapeRecord& rec, const ConversionConfigd& cfg) {
  return obb_to_ellipse(record_obb(rec, cfg));
}

std::array<double, 5> shape_values(const ObbLed& obb, ShapeKind to, const ConversionConfigd& cfg) {
  switch (to) {
    case ShapeKind::kObb: return {obb.cx(), obb.cy(), obb.w(), obb.h(), rad_to_deg(obb.theta())};
    case ShapeKind::kEllipse: {
      const auto e = obb_to_ellipse(obb);
      return {e.cx(), e.cy(), e.r1(), e.r2(), rad_to_deg(e.theta())};
    }
    case ShapeKind::kGaucho: {
      const auto p = obb_to_gaucho(obb, cfg);
      return {p.cx, p.cy, p.alpha, p.beta, p.gamma};
    }
    case ShapeKind::kGaussian: {
      const auto g = obb_to_gaussian(obb, cfg);
      return {g.mu.x(), g.mu.y(), g.a, g.b, g.c};
    }
  }
  throw InvalidInput("unknown shape kind");
}

ShapeRecord convert_record(const ShapeRecord& rec, ShapeKind to, const ConversionConfigd& cfg) {
  ShapeRecord out = rec;
  out.kind = to;
  if (rec.kind == to) return out;
  if (to == ShapeKind::kGaucho || to == ShapeKind::kGaussian) {
    // Go through the Gaussian directly so no decode tolerance is involved.
    const Gaussian2d g = record_gaussian(rec, cfg);
    if (to == ShapeKind::kGaussian) {
      out.values = {g.mu.x(), g.mu.y(), g.a, g.b, g.c};
    } else {
      const auto p = gaussian_to_cholesky(g);
      out.values = {p.cx, p.cy, p.alpha, p.beta, p.gamma};
    }
    return out;
  }
  out.values = shape_values(record_obb(rec, cfg), to, cfg);
  return out;
}

GroundTruthRecord to_ground_truth(const ShapeRecord& rec, const ConversionConfigd& cfg) {
  return {rec.image_id, rec.category, record_obb(rec, cfg), rec.difficult};
}

DetectionRecord to_detection(const ShapeRecord& rec, const ConversionConfigd& cfg) {
  return {rec.image_id, rec.category, record_obb(rec, cfg), rec.score.value_or(1.0)};
}

Parsed<MaskRecord> parse_masks(std::istream& in) { return parse_lines<MaskRecord>(in, &mask_from_json); }

}  // namespace gaucho::io

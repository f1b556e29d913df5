// Record I/O: DOTA quadrilateral annotations, JSONL shape records and JSONL
// polygon masks. Parsers keep going past malformed lines and report them.
#ifndef GAUCHO_IO_HPP
#define GAUCHO_IO_HPP

#include "gaucho/core.hpp"
#include "gaucho/eval.hpp"
#include "gaucho/overlap.hpp"

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace gaucho::io {

struct ParseIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

template <typename T>
struct Parsed {
  std::vector<T> records;
  std::vector<ParseIssue> issues;
};

struct DotaAnnotation {
  std::array<Point, 4> corners;
  std::string category;
  bool difficult = false;
  std::size_t line = 0;
};

/// Lines whose first token is not numeric (imagesource:, gsd:) are skipped
/// silently; numeric lines that fail to parse become issues.
Parsed<DotaAnnotation> parse_dota(std::istream& in);

/// Corners must form a simple quadrilateral; the box is their minimum-area rectangle.
ObbLed dota_to_obb(const DotaAnnotation& ann);

enum class ShapeKind { kObb, kGaucho, kEllipse, kGaussian };

const char* shape_key(ShapeKind kind);
std::optional<ShapeKind> shape_kind_from_key(const std::string& key);

/// One JSONL record. Angles in `values` are degrees, as on the wire.
struct ShapeRecord {
  std::string image_id;
  std::string category;
  ShapeKind kind = ShapeKind::kObb;
  std::array<double, 5> values{};
  std::optional<double> score;
  bool difficult = false;
  std::optional<std::string> record_id;
};

ShapeRecord parse_record_line(const std::string& line);
Parsed<ShapeRecord> parse_records(std::istream& in);
std::string format_record(const ShapeRecord& rec);

Gaussian2d record_gaussian(const ShapeRecord& rec, const ConversionConfigd& cfg = {});
ObbLed record_obb(const ShapeRecord& rec, const ConversionConfigd& cfg = {});
OrientedEllipsed record_ellipse(const ShapeRecord& rec, const ConversionConfigd& cfg = {});
ShapeRecord convert_record(const ShapeRecord& rec, ShapeKind to, const ConversionConfigd& cfg = {});
/// Shape values of an OBB in the requested wire form.
std::array<double, 5> shape_values(const ObbLed& obb, ShapeKind to, const ConversionConfigd& cfg = {});

GroundTruthRecord to_ground_truth(const ShapeRecord& rec, const ConversionConfigd& cfg = {});
DetectionRecord to_detection(const ShapeRecord& rec, const ConversionConfigd& cfg = {});

struct MaskRecord {
  std::string image_id;
  std::string category;
  std::optional<std::string> record_id;
  std::vector<Polygon> polygons;
};

/// {"image_id", "category", "record_id"?, "polygons": [[[x, y], ...], ...]}
Parsed<MaskRecord> parse_masks(std::istream& in);

}  // namespace gaucho::io

#endif  // GAUCHO_IO_HPP

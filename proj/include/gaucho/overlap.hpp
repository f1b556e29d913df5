// Overlap kernels: box-box IoU by convex clipping, ellipse-ellipse IoU by
// scanline integration, shape-vs-mask IoU by rasterization, and the
// minimum-area enclosing rectangle used to ingest quadrilaterals.
#ifndef GAUCHO_OVERLAP_HPP
#define GAUCHO_OVERLAP_HPP

#include "gaucho/core.hpp"

#include <Eigen/Geometry>

#include <array>
#include <span>
#include <variant>
#include <vector>

namespace gaucho {

using Point = Eigen::Vector2d;
using Polygon = std::vector<Point>;

/// Counter-clockwise strictly convex polygon.
class ConvexPoly {
 public:
  /// Validates orientation and convexity (cross-product tolerance 1e-9
  /// relative to the squared polygon extent). Clockwise input is reversed.
  static ConvexPoly from_vertices(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const { return vertices_; }
  double area() const;

 private:
  explicit ConvexPoly(std::vector<Point> v) : vertices_(std::move(v)) {}
  std::vector<Point> vertices_;
};

/// Signed shoelace area; positive for counter-clockwise vertex order.
double signed_area(std::span<const Point> vertices);

/// Corners in counter-clockwise order starting at (+w/2, +h/2) local.
std::array<Point, 4> obb_corners(const ObbLed& obb);
ConvexPoly obb_polygon(const ObbLed& obb);

/// Sutherland-Hodgman clip of a convex subject against a convex clipper.
Polygon clip_convex(const ConvexPoly& subject, const ConvexPoly& clipper);

double convex_iou(const ConvexPoly& x, const ConvexPoly& y);
double obb_iou(const ObbLed& x, const ObbLed& y);

/// Ellipse IoU; intersection area integrated to relative tolerance tol.
double ellipse_iou(const OrientedEllipsed& x, const OrientedEllipsed& y, double tol = 1e-4);
double ellipse_intersection_area(const OrientedEllipsed& x, const OrientedEllipsed& y, double tol = 1e-4);

struct RasterGrid {
  int resolution = 512;  // cells per axis
  Eigen::AlignedBox2d window;

  void validate() const;
  /// Grid over the bounding box of all given points, padded by one cell.
  static RasterGrid covering(int resolution, std::span<const Point> points);
};

using MaskShape = std::variant<ObbLed, OrientedEllipsed>;

/// IoU between a shape and a polygon mask (union of simple polygons, each
/// filled by the even-odd rule) over the cell centers of grid.
double shape_mask_iou(const MaskShape& shape, std::span<const Polygon> mask, const RasterGrid& grid);
/// Same, on a grid covering both shape and mask.
double shape_mask_iou(const MaskShape& shape, std::span<const Polygon> mask, int resolution);

std::vector<Point> convex_hull(std::span<const Point> points);

/// Minimum-area enclosing rectangle via rotating calipers over the hull.
ObbLed min_area_rect(std::span<const Point> points);

}  // namespace gaucho

#endif  // GAUCHO_OVERLAP_HPP

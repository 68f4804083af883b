#pragma once

#include <array>
#include <vector>

namespace obt {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Box orientation in the le135 convention: radians in [-pi/4, 3*pi/4),
// measured from the +x axis to the box's long side. Rectangles repeat with
// period pi, so any input angle has a unique canonical representative.
class Angle {
public:
  Angle() = default;
  static Angle from_radians(double theta);  // canonicalizes

  double radians() const { return value_; }

private:
  double value_ = 0.0;
};

double canonicalize_angle(double theta);

// Rotated rectangle with w >= h (long side first); angle is canonical.
struct OrientedBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;
  Angle angle;

  double area() const { return w * h; }
};

OrientedBox canonicalize_box(double cx, double cy, double w, double h, double theta);

// Corner vertices in counterclockwise order; centroid equals (cx, cy).
std::array<Point2, 4> corners(const OrientedBox& box);

// Vertices in counterclockwise order; may be empty.
struct ConvexPolygon {
  std::vector<Point2> vertices;

  double area() const;  // shoelace, >= 0 for CCW input
  bool empty() const { return vertices.size() < 3; }
};

ConvexPolygon polygon_from_box(const OrientedBox& box);

// Intersection of two convex polygons by half-plane clipping.
ConvexPolygon intersect_convex(const ConvexPolygon& a, const ConvexPolygon& b);

// Axis-aligned rectangle, used for image bounds and IoF tests.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains(const Point2& p) const {
    return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1;
  }
};

double intersection_area(const OrientedBox& a, const OrientedBox& b);

// Intersection over union of two rotated boxes, in [0, 1].
double riou(const OrientedBox& a, const OrientedBox& b);

// Intersection over the box's own area, in [0, 1].
double iof(const OrientedBox& box, const Rect& region);

// Entry (i, j) = riou(rows[i], cols[j]); row-major |rows| x |cols|.
std::vector<std::vector<double>> riou_matrix(const std::vector<OrientedBox>& rows,
                                             const std::vector<OrientedBox>& cols);

// Maps a sigmoid-normalized prediction in [0, 1] onto the le135 range:
// theta = (normalized - 1/4) * pi, canonicalized.
Angle decode_angle(double normalized);

// One refinement step on a previous normalized prediction:
// theta_r = (sigmoid(logit(prev) + delta) - 1/4) * pi.
Angle refine_angle(double prev_normalized, double delta);

// (measured - predicted) wrapped mod pi into [-pi/2, pi/2). Adding the
// residual to the prediction and canonicalizing recovers the measurement.
double angle_residual(const Angle& measured, const Angle& predicted);

}  // namespace obt

#include "obt/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace obt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegenerateArea = 1e-12;  // intersections below this are empty

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

double canonicalize_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::domain_error("canonicalize_angle: non-finite angle");
  }
  double r = std::fmod(theta + kPi / 4.0, kPi);
  if (r < 0.0) r += kPi;
  r -= kPi / 4.0;
  // fmod can land exactly on the open upper bound through rounding.
  if (r >= 3.0 * kPi / 4.0) r -= kPi;
  return r;
}

Angle Angle::from_radians(double theta) {
  Angle a;
  a.value_ = canonicalize_angle(theta);
  return a;
}

OrientedBox canonicalize_box(double cx, double cy, double w, double h, double theta) {
  if (!(w > 0.0) || !(h > 0.0)) {
    throw std::domain_error("canonicalize_box: non-positive size");
  }
  if (h > w) {
    std::swap(w, h);
    theta += kPi / 2.0;
  }
  OrientedBox box;
  box.cx = cx;
  box.cy = cy;
  box.w = w;
  box.h = h;
  box.angle = Angle::from_radians(theta);
  return box;
}

std::array<Point2, 4> corners(const OrientedBox& box) {
  const double c = std::cos(box.angle.radians());
  const double s = std::sin(box.angle.radians());
  const double hx = 0.5 * box.w;
  const double hy = 0.5 * box.h;
  // u along the long side, v perpendicular; CCW order.
  const Point2 u{c * hx, s * hx};
  const Point2 v{-s * hy, c * hy};
  return {Point2{box.cx - u.x - v.x, box.cy - u.y - v.y},
          Point2{box.cx + u.x - v.x, box.cy + u.y - v.y},
          Point2{box.cx + u.x + v.x, box.cy + u.y + v.y},
          Point2{box.cx - u.x + v.x, box.cy - u.y + v.y}};
}

double ConvexPolygon::area() const {
  if (vertices.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Point2& p = vertices[i];
    const Point2& q = vertices[(i + 1) % vertices.size()];
    acc += p.x * q.y - q.x * p.y;
  }
  return 0.5 * acc;
}

ConvexPolygon polygon_from_box(const OrientedBox& box) {
  auto cs = corners(box);
  ConvexPolygon poly;
  poly.vertices.assign(cs.begin(), cs.end());
  return poly;
}

ConvexPolygon intersect_convex(const ConvexPolygon& a, const ConvexPolygon& b) {
  ConvexPolygon out = a;
  const std::size_t nb = b.vertices.size();
  for (std::size_t i = 0; i < nb && !out.vertices.empty(); ++i) {
    const Point2& e0 = b.vertices[i];
    const Point2& e1 = b.vertices[(i + 1) % nb];
    std::vector<Point2> kept;
    kept.reserve(out.vertices.size() + 1);
    const std::size_t n = out.vertices.size();
    for (std::size_t j = 0; j < n; ++j) {
      const Point2& cur = out.vertices[j];
      const Point2& nxt = out.vertices[(j + 1) % n];
      const double dc = cross(e0, e1, cur);
      const double dn = cross(e0, e1, nxt);
      if (dc >= 0.0) kept.push_back(cur);
      if ((dc > 0.0 && dn < 0.0) || (dc < 0.0 && dn > 0.0)) {
        const double t = dc / (dc - dn);
        kept.push_back(Point2{cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
      }
    }
    out.vertices = std::move(kept);
  }
  if (out.vertices.size() < 3 || out.area() < kDegenerateArea) {
    out.vertices.clear();
  }
  return out;
}

namespace {

bool box_before(const OrientedBox& a, const OrientedBox& b) {
  if (a.cx != b.cx) return a.cx < b.cx;
  if (a.cy != b.cy) return a.cy < b.cy;
  if (a.w != b.w) return a.w < b.w;
  if (a.h != b.h) return a.h < b.h;
  return a.angle.radians() < b.angle.radians();
}

bool box_equal(const OrientedBox& a, const OrientedBox& b) {
  return a.cx == b.cx && a.cy == b.cy && a.w == b.w && a.h == b.h &&
         a.angle.radians() == b.angle.radians();
}

}  // namespace

double intersection_area(const OrientedBox& a, const OrientedBox& b) {
  // Order the operands so clipping roundoff cannot break symmetry.
  const OrientedBox& first = box_before(b, a) ? b : a;
  const OrientedBox& second = box_before(b, a) ? a : b;
  ConvexPolygon inter =
      intersect_convex(polygon_from_box(first), polygon_from_box(second));
  return inter.area();
}

double riou(const OrientedBox& a, const OrientedBox& b) {
  if (box_equal(a, b)) return a.area() > 0.0 ? 1.0 : 0.0;
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  double v = inter / uni;
  return v > 1.0 ? 1.0 : v;
}

double iof(const OrientedBox& box, const Rect& region) {
  if (!(region.area() > 0.0)) {
    throw std::domain_error("iof: region must have positive area");
  }
  ConvexPolygon rect;
  rect.vertices = {Point2{region.x0, region.y0}, Point2{region.x1, region.y0},
                   Point2{region.x1, region.y1}, Point2{region.x0, region.y1}};
  ConvexPolygon inter = intersect_convex(polygon_from_box(box), rect);
  double v = inter.area() / box.area();
  if (v < 0.0) v = 0.0;
  return v > 1.0 ? 1.0 : v;
}

std::vector<std::vector<double>> riou_matrix(const std::vector<OrientedBox>& rows,
                                             const std::vector<OrientedBox>& cols) {
  std::vector<std::vector<double>> m(rows.size(), std::vector<double>(cols.size(), 0.0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      m[i][j] = riou(rows[i], cols[j]);
    }
  }
  return m;
}

Angle decode_angle(double normalized) {
  if (!(normalized >= 0.0 && normalized <= 1.0)) {
    throw std::domain_error("decode_angle: normalized angle outside [0, 1]");
  }
  return Angle::from_radians((normalized - 0.25) * kPi);
}

Angle refine_angle(double prev_normalized, double delta) {
  if (!(prev_normalized > 0.0 && prev_normalized < 1.0)) {
    throw std::domain_error("refine_angle: previous prediction must lie in (0, 1)");
  }
  if (!std::isfinite(delta)) {
    throw std::domain_error("refine_angle: non-finite delta");
  }
  const double logit = std::log(prev_normalized / (1.0 - prev_normalized));
  const double refined = 1.0 / (1.0 + std::exp(-(logit + delta)));
  return Angle::from_radians((refined - 0.25) * kPi);
}

double angle_residual(const Angle& measured, const Angle& predicted) {
  double d = measured.radians() - predicted.radians();
  d = std::fmod(d + kPi / 2.0, kPi);
  if (d < 0.0) d += kPi;
  d -= kPi / 2.0;
  if (d >= kPi / 2.0) d -= kPi;
  return d;
}

}  // namespace obt

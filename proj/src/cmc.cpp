#include "obt/cmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "obt/rng.hpp"

namespace obt {

Point2 SimilarityTransform::apply(const Point2& p) const {
  const double c = std::cos(rotation), s = std::sin(rotation);
  return Point2{scale * (c * p.x - s * p.y) + tx, scale * (s * p.x + c * p.y) + ty};
}

OrientedBox SimilarityTransform::apply(const OrientedBox& box) const {
  const Point2 c = apply(Point2{box.cx, box.cy});
  return canonicalize_box(c.x, c.y, box.w * scale, box.h * scale,
                          box.angle.radians() + rotation);
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = -rotation;
  const double c = std::cos(rotation), s = std::sin(rotation);
  inv.tx = -(c * tx + s * ty) / scale;
  inv.ty = -(-s * tx + c * ty) / scale;
  return inv;
}

SimilarityTransform SimilarityTransform::after(const SimilarityTransform& other) const {
  SimilarityTransform out;
  out.scale = scale * other.scale;
  out.rotation = rotation + other.rotation;
  const Point2 t = apply(Point2{other.tx, other.ty});
  out.tx = t.x;
  out.ty = t.y;
  return out;
}

namespace {

double bilinear(const GrayFrame& f, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double ax = x - x0, ay = y - y0;
  const double v00 = f.at(x0, y0), v10 = f.at(x0 + 1, y0);
  const double v01 = f.at(x0, y0 + 1), v11 = f.at(x0 + 1, y0 + 1);
  return (1 - ay) * ((1 - ax) * v00 + ax * v10) + ay * ((1 - ax) * v01 + ax * v11);
}

bool in_interior(const GrayFrame& f, double x, double y, double margin) {
  return x >= margin && y >= margin && x <= f.width - 1 - margin && y <= f.height - 1 - margin;
}

GrayFrame downsample(const GrayFrame& src) {
  GrayFrame dst;
  dst.width = src.width / 2;
  dst.height = src.height / 2;
  dst.values.resize(static_cast<std::size_t>(dst.width) * dst.height);
  // [1 2 1]/4 smoothing in both axes, then 2x decimation.
  auto clamped = [&](int x, int y) {
    x = std::clamp(x, 0, src.width - 1);
    y = std::clamp(y, 0, src.height - 1);
    return src.at(x, y);
  };
  for (int y = 0; y < dst.height; ++y) {
    for (int x = 0; x < dst.width; ++x) {
      const int sx = 2 * x, sy = 2 * y;
      double acc = 0.0;
      static constexpr double kW[3] = {0.25, 0.5, 0.25};
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          acc += kW[dy + 1] * kW[dx + 1] * clamped(sx + dx, sy + dy);
        }
      }
      dst.at(x, y) = acc;
    }
  }
  return dst;
}

constexpr int kPyramidLevels = 3;
constexpr int kLkHalfWindow = 10;  // 21x21
constexpr int kLkMaxIterations = 30;
constexpr double kLkEpsilon = 0.01;  // px
constexpr double kMinGramDet = 1e-6;

}  // namespace

std::vector<Point2> detect_corners(const GrayFrame& frame, int max_count, double quality,
                                   double min_distance) {
  std::vector<Point2> out;
  if (frame.width < 16 || frame.height < 16 || max_count <= 0) return out;

  const int w = frame.width, h = frame.height;
  std::vector<double> ix(static_cast<std::size_t>(w) * h, 0.0);
  std::vector<double> iy(ix.size(), 0.0);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      ix[static_cast<std::size_t>(y) * w + x] = 0.5 * (frame.at(x + 1, y) - frame.at(x - 1, y));
      iy[static_cast<std::size_t>(y) * w + x] = 0.5 * (frame.at(x, y + 1) - frame.at(x, y - 1));
    }
  }

  // Minimum-eigenvalue response over a 3x3 structure-tensor window.
  std::vector<double> response(ix.size(), 0.0);
  double max_response = 0.0;
  for (int y = 2; y < h - 2; ++y) {
    for (int x = 2; x < w - 2; ++x) {
      double sxx = 0.0, sxy = 0.0, syy = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const std::size_t i = static_cast<std::size_t>(y + dy) * w + (x + dx);
          sxx += ix[i] * ix[i];
          sxy += ix[i] * iy[i];
          syy += iy[i] * iy[i];
        }
      }
      const double tr = sxx + syy;
      const double det_term = std::sqrt((sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy);
      const double lambda_min = 0.5 * (tr - det_term);
      response[static_cast<std::size_t>(y) * w + x] = lambda_min;
      max_response = std::max(max_response, lambda_min);
    }
  }
  if (max_response <= 0.0) return out;

  const double threshold = quality * max_response;
  struct Candidate {
    double score;
    int x, y;
  };
  std::vector<Candidate> candidates;
  for (int y = 2; y < h - 2; ++y) {
    for (int x = 2; x < w - 2; ++x) {
      const double r = response[static_cast<std::size_t>(y) * w + x];
      if (r < threshold || r <= 0.0) continue;
      bool local_max = true;
      for (int dy = -1; dy <= 1 && local_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (response[static_cast<std::size_t>(y + dy) * w + (x + dx)] > r) {
            local_max = false;
            break;
          }
        }
      }
      if (local_max) candidates.push_back({r, x, y});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });

  const double min_d2 = min_distance * min_distance;
  for (const Candidate& c : candidates) {
    bool ok = true;
    for (const Point2& kept : out) {
      const double dx = kept.x - c.x, dy = kept.y - c.y;
      if (dx * dx + dy * dy < min_d2) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    out.push_back(Point2{static_cast<double>(c.x), static_cast<double>(c.y)});
    if (static_cast<int>(out.size()) >= max_count) break;
  }
  return out;
}

namespace {

// Single-level iterative LK around one point; guess/result in level coords.
std::optional<Point2> lk_at_level(const GrayFrame& prev, const GrayFrame& next, Point2 p,
                                  Point2 guess) {
  const double margin = kLkHalfWindow + 2.0;
  if (!in_interior(prev, p.x, p.y, margin)) return std::nullopt;

  // Template gradients from the previous frame, fixed across iterations.
  const int n = 2 * kLkHalfWindow + 1;
  std::vector<double> tpl(n * n), gx(n * n), gy(n * n);
  double gxx = 0.0, gxy = 0.0, gyy = 0.0;
  for (int wy = -kLkHalfWindow; wy <= kLkHalfWindow; ++wy) {
    for (int wx = -kLkHalfWindow; wx <= kLkHalfWindow; ++wx) {
      const double sx = p.x + wx, sy = p.y + wy;
      const std::size_t i =
          static_cast<std::size_t>(wy + kLkHalfWindow) * n + (wx + kLkHalfWindow);
      tpl[i] = bilinear(prev, sx, sy);
      gx[i] = 0.5 * (bilinear(prev, sx + 1, sy) - bilinear(prev, sx - 1, sy));
      gy[i] = 0.5 * (bilinear(prev, sx, sy + 1) - bilinear(prev, sx, sy - 1));
      gxx += gx[i] * gx[i];
      gxy += gx[i] * gy[i];
      gyy += gy[i] * gy[i];
    }
  }
  const double det = gxx * gyy - gxy * gxy;
  if (det < kMinGramDet || gxx + gyy < kMinGramDet) return std::nullopt;

  Point2 d = guess;
  for (int iter = 0; iter < kLkMaxIterations; ++iter) {
    if (!in_interior(next, p.x + d.x, p.y + d.y, margin)) return std::nullopt;
    double bx = 0.0, by = 0.0;
    for (int wy = -kLkHalfWindow; wy <= kLkHalfWindow; ++wy) {
      for (int wx = -kLkHalfWindow; wx <= kLkHalfWindow; ++wx) {
        const std::size_t i =
            static_cast<std::size_t>(wy + kLkHalfWindow) * n + (wx + kLkHalfWindow);
        const double diff = tpl[i] - bilinear(next, p.x + d.x + wx, p.y + d.y + wy);
        bx += diff * gx[i];
        by += diff * gy[i];
      }
    }
    const double sx = (gyy * bx - gxy * by) / det;
    const double sy = (gxx * by - gxy * bx) / det;
    d.x += sx;
    d.y += sy;
    if (std::hypot(sx, sy) < kLkEpsilon) break;
  }
  if (!in_interior(next, p.x + d.x, p.y + d.y, 1.0)) return std::nullopt;
  return d;
}

}  // namespace

std::vector<std::optional<Point2>> track_lk(const GrayFrame& prev, const GrayFrame& next,
                                            const std::vector<Point2>& points) {
  if (prev.width != next.width || prev.height != next.height) {
    throw std::domain_error("track_lk: frame dimensions differ");
  }
  std::vector<GrayFrame> pyr_prev{prev}, pyr_next{next};
  for (int l = 1; l < kPyramidLevels; ++l) {
    if (pyr_prev.back().width < 2 * (kLkHalfWindow + 2) ||
        pyr_prev.back().height < 2 * (kLkHalfWindow + 2)) {
      break;
    }
    pyr_prev.push_back(downsample(pyr_prev.back()));
    pyr_next.push_back(downsample(pyr_next.back()));
  }

  std::vector<std::optional<Point2>> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    Point2 flow{0.0, 0.0};
    bool ok = true;
    for (int l = static_cast<int>(pyr_prev.size()) - 1; l >= 0; --l) {
      const double inv = 1.0 / static_cast<double>(1 << l);
      const Point2 pl{points[i].x * inv, points[i].y * inv};
      auto d = lk_at_level(pyr_prev[l], pyr_next[l], pl, flow);
      if (!d) {
        // Coarse levels may lack margin near borders; only the finest
        // level is authoritative for failure.
        if (l == 0) {
          ok = false;
        }
        if (l > 0) flow = Point2{flow.x * 2.0, flow.y * 2.0};
        continue;
      }
      flow = *d;
      if (l > 0) flow = Point2{flow.x * 2.0, flow.y * 2.0};
    }
    if (ok) {
      out[i] = Point2{points[i].x + flow.x, points[i].y + flow.y};
    }
  }
  return out;
}

namespace {

struct ComplexFit {
  double ax = 1.0, ay = 0.0;  // a = ax + i*ay
  double bx = 0.0, by = 0.0;
};

// Least-squares similarity as a complex linear fit q = a*p + b.
std::optional<ComplexFit> ls_similarity(const std::vector<std::pair<Point2, Point2>>& pairs) {
  const std::size_t n = pairs.size();
  double pmx = 0.0, pmy = 0.0, qmx = 0.0, qmy = 0.0;
  for (const auto& [p, q] : pairs) {
    pmx += p.x;
    pmy += p.y;
    qmx += q.x;
    qmy += q.y;
  }
  pmx /= n;
  pmy /= n;
  qmx /= n;
  qmy /= n;
  double num_x = 0.0, num_y = 0.0, den = 0.0;
  for (const auto& [p, q] : pairs) {
    const double px = p.x - pmx, py = p.y - pmy;
    const double qx = q.x - qmx, qy = q.y - qmy;
    num_x += qx * px + qy * py;   // Re(q * conj(p))
    num_y += qy * px - qx * py;   // Im(q * conj(p))
    den += px * px + py * py;
  }
  if (den < 1e-12) return std::nullopt;
  ComplexFit f;
  f.ax = num_x / den;
  f.ay = num_y / den;
  f.bx = qmx - (f.ax * pmx - f.ay * pmy);
  f.by = qmy - (f.ay * pmx + f.ax * pmy);
  return f;
}

SimilarityTransform to_transform(const ComplexFit& f) {
  SimilarityTransform t;
  t.scale = std::hypot(f.ax, f.ay);
  t.rotation = std::atan2(f.ay, f.ax);
  t.tx = f.bx;
  t.ty = f.by;
  return t;
}

double residual(const ComplexFit& f, const Point2& p, const Point2& q) {
  const double rx = f.ax * p.x - f.ay * p.y + f.bx - q.x;
  const double ry = f.ay * p.x + f.ax * p.y + f.by - q.y;
  return std::hypot(rx, ry);
}

}  // namespace

SimilarityTransform fit_similarity(const std::vector<std::pair<Point2, Point2>>& pairs,
                                   const RansacParams& params) {
  if (pairs.size() < 2) {
    throw std::runtime_error("fit_similarity: need at least 2 point pairs");
  }

  const int n = static_cast<int>(pairs.size());
  std::vector<char> best_mask(n, 0);
  int best_count = 0;

  Rng rng(params.seed);
  for (int it = 0; it < params.iterations; ++it) {
    const int i = rng.uniform_int(0, n - 1);
    int j = rng.uniform_int(0, n - 2);
    if (j >= i) ++j;
    const Point2& p1 = pairs[i].first;
    const Point2& p2 = pairs[j].first;
    const double dx = p2.x - p1.x, dy = p2.y - p1.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < 1e-12) continue;
    // Exact 2-point similarity: a = (q2 - q1)/(p2 - p1), b = q1 - a*p1.
    const Point2& q1 = pairs[i].second;
    const Point2& q2 = pairs[j].second;
    const double ex = q2.x - q1.x, ey = q2.y - q1.y;
    ComplexFit f;
    f.ax = (ex * dx + ey * dy) / d2;
    f.ay = (ey * dx - ex * dy) / d2;
    f.bx = q1.x - (f.ax * p1.x - f.ay * p1.y);
    f.by = q1.y - (f.ay * p1.x + f.ax * p1.y);

    std::vector<char> mask(n, 0);
    int count = 0;
    for (int k = 0; k < n; ++k) {
      if (residual(f, pairs[k].first, pairs[k].second) <= params.inlier_threshold) {
        mask[k] = 1;
        ++count;
      }
    }
    if (count > best_count) {
      best_count = count;
      best_mask = mask;
    }
  }

  std::vector<std::pair<Point2, Point2>> inliers;
  if (best_count >= 2) {
    for (int k = 0; k < n; ++k) {
      if (best_mask[k]) inliers.push_back(pairs[k]);
    }
  } else {
    inliers = pairs;  // tiny or degenerate sets: fall back to a global fit
  }

  auto fit = ls_similarity(inliers);
  if (!fit) {
    throw std::runtime_error("fit_similarity: degenerate point configuration");
  }
  if (!(std::hypot(fit->ax, fit->ay) > 0.0)) {
    throw std::runtime_error("fit_similarity: zero-scale solution");
  }
  return to_transform(*fit);
}

namespace {
constexpr int kCmcMaxCorners = 200;
constexpr double kCmcQuality = 0.01;
constexpr double kCmcMinDistance = 8.0;
constexpr int kCmcMinPairs = 10;
}  // namespace

PlatformMotion estimate_platform_motion(const GrayFrame& prev, const GrayFrame& next) {
  PlatformMotion result;
  const auto corners = detect_corners(prev, kCmcMaxCorners, kCmcQuality, kCmcMinDistance);
  if (corners.empty()) {
    result.degraded = true;
    return result;
  }
  const auto tracked = track_lk(prev, next, corners);
  std::vector<std::pair<Point2, Point2>> pairs;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    if (tracked[i]) pairs.emplace_back(corners[i], *tracked[i]);
  }
  if (static_cast<int>(pairs.size()) < kCmcMinPairs) {
    result.degraded = true;
    return result;
  }
  try {
    result.transform = fit_similarity(pairs);
  } catch (const std::runtime_error&) {
    result.degraded = true;
  }
  return result;
}

DisplacementStats decompose_displacement(const OrientedBox& prev_box, const OrientedBox& next_box,
                                         const SimilarityTransform& platform) {
  DisplacementStats stats;
  const Point2 c{prev_box.cx, prev_box.cy};
  const Point2 cn{next_box.cx, next_box.cy};
  const Point2 tc = platform.apply(c);
  stats.total = std::hypot(cn.x - c.x, cn.y - c.y);
  stats.drone = std::hypot(tc.x - c.x, tc.y - c.y);
  stats.object = std::hypot(cn.x - tc.x, cn.y - tc.y);
  stats.iou_total = riou(prev_box, next_box);
  stats.iou_object = riou(platform.apply(prev_box), next_box);
  return stats;
}

}  // namespace obt

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "obt/geometry.hpp"

namespace obt {

// Row-major grayscale intensity grid; arbitrary scale, finite values.
struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

// 4-DOF planar similarity: p' = scale * R(rotation) * p + translation.
struct SimilarityTransform {
  double scale = 1.0;
  double rotation = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Point2 apply(const Point2& p) const;
  OrientedBox apply(const OrientedBox& box) const;  // center, angle, and sizes
  SimilarityTransform inverse() const;
  // Composition this(other(p)).
  SimilarityTransform after(const SimilarityTransform& other) const;
  static SimilarityTransform identity() { return {}; }
};

struct DisplacementStats {
  double drone = 0.0;   // platform-induced apparent motion of the center, px
  double object = 0.0;  // ground-relative motion after compensation, px
  double total = 0.0;   // combined apparent motion, px
  double iou_object = 0.0;
  double iou_total = 0.0;
};

// Shi-Tomasi corners: minimum eigenvalue of the windowed structure tensor,
// thresholded at quality * max response, non-max suppressed by min_distance,
// strongest first, at most max_count.
std::vector<Point2> detect_corners(const GrayFrame& frame, int max_count, double quality,
                                   double min_distance);

// Pyramidal Lucas-Kanade (3 levels, 21x21 window, <=30 iterations,
// convergence 0.01 px). Result is empty where tracking diverged or left
// the frame.
std::vector<std::optional<Point2>> track_lk(const GrayFrame& prev, const GrayFrame& next,
                                            const std::vector<Point2>& points);

struct RansacParams {
  int iterations = 200;
  double inlier_threshold = 3.0;  // px
  std::uint64_t seed = 0x51a7e5;
};

// RANSAC followed by a least-squares similarity fit on the inlier set.
SimilarityTransform fit_similarity(const std::vector<std::pair<Point2, Point2>>& pairs,
                                   const RansacParams& params = RansacParams{});

struct PlatformMotion {
  SimilarityTransform transform;
  bool degraded = false;  // identity fallback: too few tracked pairs
};

PlatformMotion estimate_platform_motion(const GrayFrame& prev, const GrayFrame& next);

DisplacementStats decompose_displacement(const OrientedBox& prev_box, const OrientedBox& next_box,
                                         const SimilarityTransform& platform);

}  // namespace obt

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "obt/cmc.hpp"
#include "obt/dataio.hpp"
#include "obt/metrics.hpp"
#include "obt/trackers.hpp"

namespace obt {

struct PlatformConfig {
  double translation_x = 0.0;  // px per frame
  double translation_y = 0.0;
  double rotation = 0.0;       // rad per frame, about the image center
  double jitter_std = 0.0;     // px, gaussian on the per-frame translation
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  int n_objects = 10;
  int frames = 50;
  double image_width = 1200.0;
  double image_height = 900.0;
  double speed_min = 0.5;  // px per frame over ground
  double speed_max = 2.5;
  double turn_rate_max = 0.02;  // rad per frame, magnitude
  double box_size_min = 12.0;   // long side, px
  double box_size_max = 28.0;
  PlatformConfig platform;
  std::array<double, kNumClasses> class_distribution{
      0.35, 0.30, 0.08, 0.06, 0.04, 0.06, 0.08, 0.03};
  // Spawn spacing keeps scenarios well separated; 0 picks a default of
  // roughly three box diagonals.
  double min_separation = 0.0;
  bool render_cubes = false;
  int cube_bands = 8;
};

struct Scenario {
  LabeledFrameSet gt;
  std::vector<SimilarityTransform> platform_transforms;  // element f: frame f-1 -> f
  std::vector<SpectralCube> cubes;                       // empty unless rendered
};

Scenario generate(const ScenarioConfig& config);

struct PerturbConfig {
  double miss_rate = 0.0;
  double fp_rate = 0.0;  // expected false positives per frame
  double center_noise_std = 0.0;
  double size_noise_std = 0.0;  // relative
  double angle_noise_std = 0.0;
  double matched_conf_mean = 0.9;
  double matched_conf_std = 0.05;
  double fp_conf_mean = 0.3;
  double fp_conf_std = 0.1;
  double image_width = 1200.0;  // sampling region for false positives
  double image_height = 900.0;
};

std::vector<std::vector<Detection>> perturb(const LabeledFrameSet& gt, const PerturbConfig& config,
                                            std::uint64_t seed);

// Per-class spectral signatures used when rendering cubes; 8 classes x 8
// bands, matching the shipped fixture file.
const std::array<std::array<double, 8>, kNumClasses>& class_signatures();

// Deterministic value-noise texture in [0, 1], used for cmc test frames.
GrayFrame textured_frame(int width, int height, std::uint64_t seed);

// Resample `frame` under a similarity transform mapping old coordinates to
// new ones (bilinear; border clamped).
GrayFrame warp_frame(const GrayFrame& frame, const SimilarityTransform& transform);

}  // namespace obt

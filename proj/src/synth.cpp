#include "obt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "obt/rng.hpp"

namespace obt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Smooth value noise in [0, 1]: bilinear lattice interpolation, two octaves.
double value_noise(double x, double y, std::uint64_t seed) {
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  auto octave = [&](double px, double py, double cell, std::uint64_t salt) {
    const double gx = px / cell, gy = py / cell;
    const long long x0 = static_cast<long long>(std::floor(gx));
    const long long y0 = static_cast<long long>(std::floor(gy));
    const double fx = smooth(gx - x0), fy = smooth(gy - y0);
    const std::uint64_t s = seed ^ salt;
    auto at = [&](long long ix, long long iy) {
      std::uint64_t h = s;
      h ^= static_cast<std::uint64_t>(ix * 2654435761LL) + 0x9e3779b97f4a7c15ULL;
      h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
      h ^= static_cast<std::uint64_t>(iy * 40503LL) + 0x7f4a7c15ULL;
      h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
      return static_cast<double>((h ^ (h >> 31)) >> 11) * 0x1.0p-53;
    };
    const double v00 = at(x0, y0), v10 = at(x0 + 1, y0);
    const double v01 = at(x0, y0 + 1), v11 = at(x0 + 1, y0 + 1);
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
  };
  return 0.65 * octave(x, y, 13.0, 0x51) + 0.35 * octave(x, y, 4.0, 0xa7);
}

struct ObjectTrack {
  int id = 0;
  int class_id = 1;
  double w = 1.0, h = 1.0;
  std::vector<Point2> world;   // per-frame ground position
  std::vector<double> heading; // per-frame world heading
};

int sample_class(Rng& rng, const std::array<double, kNumClasses>& dist) {
  double total = 0.0;
  for (double w : dist) total += w;
  if (total <= 0.0) return 1;
  double r = rng.uniform() * total;
  for (int c = 0; c < kNumClasses; ++c) {
    r -= dist[c];
    if (r <= 0.0) return c + 1;
  }
  return kNumClasses;
}

ObjectTrack sample_trajectory(Rng& rng, const ScenarioConfig& cfg) {
  ObjectTrack obj;
  obj.class_id = sample_class(rng, cfg.class_distribution);
  obj.w = rng.uniform(cfg.box_size_min, cfg.box_size_max);
  obj.h = obj.w * rng.uniform(0.45, 0.95);
  const double margin = 0.15 * std::min(cfg.image_width, cfg.image_height);
  Point2 pos{rng.uniform(margin, cfg.image_width - margin),
             rng.uniform(margin, cfg.image_height - margin)};
  double heading = rng.uniform(0.0, kTwoPi);
  const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
  const double turn = rng.uniform(-cfg.turn_rate_max, cfg.turn_rate_max);
  obj.world.reserve(cfg.frames);
  obj.heading.reserve(cfg.frames);
  for (int f = 0; f < cfg.frames; ++f) {
    obj.world.push_back(pos);
    obj.heading.push_back(heading);
    pos.x += speed * std::cos(heading);
    pos.y += speed * std::sin(heading);
    heading += turn;
  }
  return obj;
}

double min_world_distance(const ObjectTrack& a, const ObjectTrack& b) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < a.world.size(); ++f) {
    const double dx = a.world[f].x - b.world[f].x;
    const double dy = a.world[f].y - b.world[f].y;
    best = std::min(best, dx * dx + dy * dy);
  }
  return std::sqrt(best);
}

}  // namespace

const std::array<std::array<double, 8>, kNumClasses>& class_signatures() {
  // Distinct reflectance profiles per class, visible through near-infrared.
  static const std::array<std::array<double, 8>, kNumClasses> kSignatures = {{
      {0.52, 0.48, 0.45, 0.50, 0.55, 0.72, 0.88, 0.90},  // pedestrian
      {0.80, 0.78, 0.75, 0.70, 0.68, 0.55, 0.42, 0.35},  // car
      {0.70, 0.72, 0.74, 0.76, 0.78, 0.80, 0.82, 0.84},  // van
      {0.60, 0.58, 0.52, 0.48, 0.45, 0.40, 0.38, 0.36},  // truck
      {0.85, 0.82, 0.60, 0.45, 0.72, 0.78, 0.50, 0.40},  // bus
      {0.45, 0.55, 0.65, 0.60, 0.50, 0.62, 0.74, 0.70},  // tricycle
      {0.38, 0.42, 0.50, 0.62, 0.70, 0.66, 0.58, 0.52},  // bike
      {0.66, 0.60, 0.56, 0.66, 0.76, 0.70, 0.64, 0.80},  // awning-bike
  }};
  return kSignatures;
}

Scenario generate(const ScenarioConfig& cfg) {
  if (cfg.frames < 0 || cfg.n_objects < 0 || cfg.image_width <= 0 || cfg.image_height <= 0) {
    throw std::invalid_argument("generate: bad scenario dimensions");
  }
  Scenario scenario;
  scenario.gt.frames.resize(cfg.frames);
  scenario.platform_transforms.assign(std::max(cfg.frames, 0), SimilarityTransform{});

  Rng root(cfg.seed);

  // Per-frame platform transforms and their running composition.
  Rng platform_rng = root.split("platform");
  std::vector<SimilarityTransform> cumulative(cfg.frames);
  const Point2 center{cfg.image_width * 0.5, cfg.image_height * 0.5};
  for (int f = 1; f < cfg.frames; ++f) {
    const double jx = cfg.platform.jitter_std > 0.0
                          ? platform_rng.normal(0.0, cfg.platform.jitter_std)
                          : 0.0;
    const double jy = cfg.platform.jitter_std > 0.0
                          ? platform_rng.normal(0.0, cfg.platform.jitter_std)
                          : 0.0;
    SimilarityTransform t;
    t.rotation = cfg.platform.rotation;
    const double c = std::cos(t.rotation), s = std::sin(t.rotation);
    // Rotation about the image center plus the frame translation.
    t.tx = center.x - (c * center.x - s * center.y) + cfg.platform.translation_x + jx;
    t.ty = center.y - (s * center.x + c * center.y) + cfg.platform.translation_y + jy;
    scenario.platform_transforms[f] = t;
    cumulative[f] = t.after(cumulative[f - 1]);
  }

  // Spawn objects with enough spacing that exact detections are unambiguous.
  const double diag = std::hypot(cfg.box_size_max, cfg.box_size_max);
  const double min_sep = cfg.min_separation > 0.0 ? cfg.min_separation : 3.2 * diag;
  Rng spawn_rng = root.split("objects");
  std::vector<ObjectTrack> objects;
  for (int i = 0; i < cfg.n_objects; ++i) {
    ObjectTrack candidate;
    bool placed = false;
    for (int attempt = 0; attempt < 300 && !placed; ++attempt) {
      candidate = sample_trajectory(spawn_rng, cfg);
      placed = true;
      for (const ObjectTrack& other : objects) {
        if (min_world_distance(candidate, other) < min_sep) {
          placed = false;
          break;
        }
      }
    }
    candidate.id = i + 1;
    objects.push_back(std::move(candidate));
  }

  std::vector<std::vector<std::pair<const ObjectTrack*, OrientedBox>>> apparent(cfg.frames);
  for (int f = 0; f < cfg.frames; ++f) {
    const SimilarityTransform& view = cumulative[f];
    for (const ObjectTrack& obj : objects) {
      const Point2 p = view.apply(obj.world[f]);
      const OrientedBox box =
          canonicalize_box(p.x, p.y, obj.w, obj.h, obj.heading[f] + view.rotation);
      apparent[f].push_back({&obj, box});
      if (!(p.x >= 0.0 && p.x < cfg.image_width && p.y >= 0.0 && p.y < cfg.image_height)) {
        continue;  // out of view: no annotation this frame
      }
      LabeledInstance inst;
      inst.track_id = obj.id;
      inst.class_id = obj.class_id;
      inst.box = box;
      inst.confidence = 1.0;
      bool outside = false;
      for (const Point2& c : corners(box)) {
        if (c.x < 0.0 || c.x > cfg.image_width || c.y < 0.0 || c.y > cfg.image_height) {
          outside = true;
          break;
        }
      }
      inst.truncated = outside;
      scenario.gt.frames[f].push_back(inst);
    }
  }

  if (cfg.render_cubes) {
    scenario.cubes.reserve(cfg.frames);
    const std::uint64_t noise_seed = root.split("texture").next_u64();
    for (int f = 0; f < cfg.frames; ++f) {
      // The static world texture is sampled through the inverse view so the
      // background moves consistently with the platform.
      const SimilarityTransform inv = cumulative[f].inverse();
      SpectralCube cube;
      cube.bands = cfg.cube_bands;
      cube.height = static_cast<int>(cfg.image_height);
      cube.width = static_cast<int>(cfg.image_width);
      cube.values.assign(static_cast<std::size_t>(cube.bands) * cube.height * cube.width, 0.0f);
      for (int y = 0; y < cube.height; ++y) {
        for (int x = 0; x < cube.width; ++x) {
          const Point2 wpt = inv.apply(Point2{static_cast<double>(x), static_cast<double>(y)});
          const double n = value_noise(wpt.x, wpt.y, noise_seed);
          for (int b = 0; b < cube.bands; ++b) {
            const double base = 0.25 + 0.04 * b;
            cube.at(b, y, x) = static_cast<float>(base * (0.55 + 0.9 * n));
          }
        }
      }
      // Paint objects at their apparent poses.
      const auto& sigs = class_signatures();
      for (const auto& [obj, box] : apparent[f]) {
        const auto cs = corners(box);
        double x0 = cs[0].x, x1 = cs[0].x, y0 = cs[0].y, y1 = cs[0].y;
        for (const Point2& c : cs) {
          x0 = std::min(x0, c.x);
          x1 = std::max(x1, c.x);
          y0 = std::min(y0, c.y);
          y1 = std::max(y1, c.y);
        }
        const int px0 = std::max(0, static_cast<int>(std::floor(x0)));
        const int px1 = std::min(cube.width - 1, static_cast<int>(std::ceil(x1)));
        const int py0 = std::max(0, static_cast<int>(std::floor(y0)));
        const int py1 = std::min(cube.height - 1, static_cast<int>(std::ceil(y1)));
        const double ct = std::cos(box.angle.radians()), st = std::sin(box.angle.radians());
        const auto& sig = sigs[obj->class_id - 1];
        for (int y = py0; y <= py1; ++y) {
          for (int x = px0; x <= px1; ++x) {
            const double dx = x - box.cx, dy = y - box.cy;
            const double lx = ct * dx + st * dy;
            const double ly = -st * dx + ct * dy;
            if (std::fabs(lx) > box.w * 0.5 || std::fabs(ly) > box.h * 0.5) continue;
            const double n = 0.85 + 0.3 * value_noise(x + 7777.0, y + 3333.0, noise_seed);
            for (int b = 0; b < cube.bands && b < 8; ++b) {
              cube.at(b, y, x) = static_cast<float>(sig[b] * n);
            }
          }
        }
      }
      scenario.cubes.push_back(std::move(cube));
    }
  }
  return scenario;
}

std::vector<std::vector<Detection>> perturb(const LabeledFrameSet& gt, const PerturbConfig& cfg,
                                            std::uint64_t seed) {
  if (cfg.miss_rate < 0.0 || cfg.miss_rate > 1.0 || cfg.fp_rate < 0.0) {
    throw std::invalid_argument("perturb: bad rates");
  }
  std::vector<std::vector<Detection>> out(gt.frame_count());
  Rng root(seed);
  for (int f = 1; f <= gt.frame_count(); ++f) {
    Rng rng = root.split("frame").split(static_cast<std::uint64_t>(f));
    auto& dets = out[f - 1];
    for (const LabeledInstance& inst : gt.frame(f)) {
      if (cfg.miss_rate > 0.0 && rng.bernoulli(cfg.miss_rate)) continue;
      Detection d;
      const double cx = inst.box.cx + rng.normal(0.0, cfg.center_noise_std);
      const double cy = inst.box.cy + rng.normal(0.0, cfg.center_noise_std);
      double w = inst.box.w * (1.0 + rng.normal(0.0, cfg.size_noise_std));
      double h = inst.box.h * (1.0 + rng.normal(0.0, cfg.size_noise_std));
      w = std::max(w, 0.5);
      h = std::max(h, 0.5);
      const double theta = inst.box.angle.radians() + rng.normal(0.0, cfg.angle_noise_std);
      d.box = canonicalize_box(cx, cy, w, h, theta);
      d.confidence = std::clamp(rng.normal(cfg.matched_conf_mean, cfg.matched_conf_std), 0.0, 1.0);
      d.class_id = inst.class_id;
      dets.push_back(d);
    }
    const int false_positives = rng.poisson(cfg.fp_rate);
    for (int i = 0; i < false_positives; ++i) {
      Detection d;
      const double w = rng.uniform(8.0, 40.0);
      const double h = w * rng.uniform(0.4, 0.95);
      d.box = canonicalize_box(rng.uniform(0.0, cfg.image_width),
                               rng.uniform(0.0, cfg.image_height), w, h,
                               rng.uniform(-std::numbers::pi / 4.0, 3.0 * std::numbers::pi / 4.0));
      d.confidence = std::clamp(rng.normal(cfg.fp_conf_mean, cfg.fp_conf_std), 0.0, 1.0);
      d.class_id = rng.uniform_int(1, kNumClasses);
      dets.push_back(d);
    }
  }
  return out;
}

GrayFrame textured_frame(int width, int height, std::uint64_t seed) {
  GrayFrame frame;
  frame.width = width;
  frame.height = height;
  frame.values.resize(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      frame.at(x, y) = 255.0 * value_noise(x, y, seed);
    }
  }
  return frame;
}

GrayFrame warp_frame(const GrayFrame& frame, const SimilarityTransform& transform) {
  const SimilarityTransform inv = transform.inverse();
  GrayFrame out;
  out.width = frame.width;
  out.height = frame.height;
  out.values.resize(frame.values.size());
  auto sample = [&](double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(frame.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(frame.height - 1));
    const int x0 = std::min(static_cast<int>(x), frame.width - 2);
    const int y0 = std::min(static_cast<int>(y), frame.height - 2);
    const double ax = x - x0, ay = y - y0;
    return (1 - ay) * ((1 - ax) * frame.at(x0, y0) + ax * frame.at(x0 + 1, y0)) +
           ay * ((1 - ax) * frame.at(x0, y0 + 1) + ax * frame.at(x0 + 1, y0 + 1));
  };
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const Point2 src = inv.apply(Point2{static_cast<double>(x), static_cast<double>(y)});
      out.at(x, y) = sample(src.x, src.y);
    }
  }
  return out;
}

}  // namespace obt

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "obt/rng.hpp"
#include "obt/stem.hpp"

using namespace obt;

namespace {

SpectralCube random_cube(int bands, int h, int w, std::uint64_t seed) {
  SpectralCube cube;
  cube.bands = bands;
  cube.height = h;
  cube.width = w;
  cube.values.resize(static_cast<std::size_t>(bands) * h * w);
  Rng rng(seed);
  for (float& v : cube.values) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return cube;
}

StemConfig tiny_config() {
  StemConfig c;
  c.bands = 8;
  c.spectral_kernel = 3;
  c.spatial_kernel = 5;
  c.out_channels = 6;
  return c;
}

}  // namespace

TEST_CASE("param_count reproduces the three stem layouts") {
  StemConfig spectral3d;  // defaults: 8 bands, k_s 3, k 7, D 64
  const StemParamCount c = param_count(spectral3d);
  CHECK(c.conv3d == 9408);
  CHECK(c.fold == 512);
  CHECK(c.total == 9920);

  CHECK(param_count_2d(3, 64, 7) == 9408);   // RGB stem
  CHECK(param_count_2d(8, 64, 7) == 25088);  // naive 8-channel 2D stem
}

TEST_CASE("forward produces the documented shapes") {
  StemConfig cfg;  // default: D 64, k 7, k_s 3
  const SpectralCube cube = random_cube(8, 64, 64, 3);
  const StemWeights weights = random_weights(cfg, 5);

  const FeatureVolume vol = forward_conv3d(cube, weights, cfg);
  CHECK(vol.channels == 64);
  CHECK(vol.depth == 8);
  CHECK(vol.height == 32);
  CHECK(vol.width == 32);

  const FeatureMap pre = forward_prepool(cube, weights, cfg);
  CHECK(pre.channels == 64);
  CHECK(pre.height == 32);
  CHECK(pre.width == 32);

  const FeatureMap out = forward(cube, weights, cfg);
  CHECK(out.channels == 64);
  CHECK(out.height == 16);
  CHECK(out.width == 16);

  SpectralCube wrong_bands = random_cube(5, 64, 64, 3);
  CHECK_THROWS_AS(forward(wrong_bands, weights, cfg), std::invalid_argument);
  SpectralCube not_divisible = random_cube(8, 62, 64, 3);
  CHECK_THROWS_AS(forward(not_divisible, weights, cfg), std::invalid_argument);
}

TEST_CASE("all-zero input maps to all-zero output") {
  const StemConfig cfg = tiny_config();
  SpectralCube zeros;
  zeros.bands = 8;
  zeros.height = 16;
  zeros.width = 16;
  zeros.values.assign(8 * 16 * 16, 0.0f);
  const StemWeights weights = random_weights(cfg, 17);
  const FeatureMap out = forward(zeros, weights, cfg);
  for (double v : out.values) CHECK(v == 0.0);
}

TEST_CASE("delta kernel with one-hot fold passes a constant through") {
  StemConfig cfg = tiny_config();
  SpectralCube constant;
  constant.bands = cfg.bands;
  constant.height = 16;
  constant.width = 16;
  constant.values.assign(static_cast<std::size_t>(cfg.bands) * 16 * 16, 2.5f);

  StemWeights w;
  w.conv3d.assign(static_cast<std::size_t>(cfg.out_channels) * cfg.spectral_kernel *
                      cfg.spatial_kernel * cfg.spatial_kernel,
                  0.0);
  w.fold.assign(static_cast<std::size_t>(cfg.out_channels) * cfg.bands, 0.0);
  const int kc = cfg.spatial_kernel / 2;
  for (int d = 0; d < cfg.out_channels; ++d) {
    // Spatial delta at the center of spectral tap 1 (the aligned tap).
    const std::size_t base = static_cast<std::size_t>(d) * cfg.spectral_kernel *
                             cfg.spatial_kernel * cfg.spatial_kernel;
    w.conv3d[base + (1 * cfg.spatial_kernel + kc) * cfg.spatial_kernel + kc] = 1.0;
    w.fold[static_cast<std::size_t>(d) * cfg.bands + 3] = 1.0;  // one-hot at band 3
  }
  const FeatureMap out = forward(constant, w, cfg);
  for (double v : out.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("positive homogeneity through pool") {
  const StemConfig cfg = tiny_config();
  const SpectralCube cube = random_cube(8, 16, 16, 23);
  const StemWeights weights = random_weights(cfg, 29);
  SpectralCube scaled = cube;
  for (float& v : scaled.values) v *= 2.0f;  // exact in binary floating point

  const FeatureMap base_pre = forward_prepool(cube, weights, cfg);
  const FeatureMap scaled_pre = forward_prepool(scaled, weights, cfg);
  for (std::size_t i = 0; i < base_pre.values.size(); ++i) {
    CHECK(scaled_pre.values[i] == doctest::Approx(2.0 * base_pre.values[i]).epsilon(1e-12));
  }
  const FeatureMap base_out = forward(cube, weights, cfg);
  const FeatureMap scaled_out = forward(scaled, weights, cfg);
  for (std::size_t i = 0; i < base_out.values.size(); ++i) {
    CHECK(scaled_out.values[i] == doctest::Approx(2.0 * base_out.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("import_rgb_weights keeps the RGB parameter count and layout") {
  StemConfig cfg;  // D 64, k 7, k_s 3
  Rng rng(31);
  std::vector<double> rgb2d(static_cast<std::size_t>(64) * 3 * 7 * 7);
  for (double& v : rgb2d) v = rng.uniform(-0.2, 0.2);
  const StemWeights w = import_rgb_weights(rgb2d, cfg);
  CHECK(w.conv3d.size() == 9408);
  CHECK(w.fold.size() == 512);
  for (double f : w.fold) CHECK(f == doctest::Approx(1.0 / 8.0));
  // Channel c of the RGB kernel becomes spectral tap c.
  CHECK(w.conv3d[5] == rgb2d[5]);

  StemConfig bad = cfg;
  bad.spectral_kernel = 7;
  CHECK_THROWS_AS(import_rgb_weights(rgb2d, bad), std::invalid_argument);
}

TEST_CASE("RGB equivalence: one-hot fold reproduces the 2D stem") {
  // Smaller channel count keeps the check quick; geometry is unchanged.
  StemConfig cfg;
  cfg.bands = 8;
  cfg.spectral_kernel = 3;
  cfg.spatial_kernel = 7;
  cfg.out_channels = 8;

  Rng rng(37);
  std::vector<double> rgb2d(static_cast<std::size_t>(cfg.out_channels) * 3 * 7 * 7);
  for (double& v : rgb2d) v = rng.uniform(-0.3, 0.3);

  SpectralCube image = random_cube(3, 32, 32, 41);
  const FeatureMap reference = forward_rgb_stem(image, rgb2d, cfg.out_channels, 7);

  for (int b = 1; b <= 6; ++b) {  // every interior spectral position
    SpectralCube cube;
    cube.bands = 8;
    cube.height = 32;
    cube.width = 32;
    cube.values.assign(8 * 32 * 32, 0.0f);
    const std::size_t plane = 32 * 32;
    for (int c = 0; c < 3; ++c) {
      std::copy_n(image.values.begin() + c * plane, plane,
                  cube.values.begin() + (b - 1 + c) * plane);
    }
    StemWeights w = import_rgb_weights(rgb2d, cfg);
    w.fold.assign(w.fold.size(), 0.0);
    for (int d = 0; d < cfg.out_channels; ++d) {
      w.fold[static_cast<std::size_t>(d) * 8 + b] = 1.0;
    }
    const FeatureMap out = forward(cube, w, cfg);
    REQUIRE(out.values.size() == reference.values.size());
    double max_diff = 0.0;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      max_diff = std::max(max_diff, std::fabs(out.values[i] - reference.values[i]));
    }
    CHECK(max_diff < 1e-6);
  }
}

TEST_CASE("gradient check against central finite differences") {
  StemConfig cfg;
  cfg.bands = 8;
  cfg.spectral_kernel = 3;
  cfg.spatial_kernel = 5;
  cfg.out_channels = 4;
  const double err = grad_check_seeded(cfg, 0);
  CHECK(err < 1e-4);

  // Determinism.
  CHECK(grad_check_seeded(cfg, 0) == err);

  // Zero input: conv gradients vanish identically.
  SpectralCube zeros;
  zeros.bands = 8;
  zeros.height = 16;
  zeros.width = 16;
  zeros.values.assign(8 * 16 * 16, 0.0f);
  const StemWeights weights = random_weights(cfg, 43);
  const StemGradients g = weight_gradients(zeros, weights, cfg);
  for (double v : g.conv3d) CHECK(v == 0.0);
  for (double v : g.fold) CHECK(v == 0.0);
}

TEST_CASE("STW1 weight container round-trips") {
  StemConfig cfg = tiny_config();
  StemWeights w = random_weights(cfg, 47);
  // Quantize to f32 so the round-trip is exact.
  for (double& v : w.conv3d) v = static_cast<double>(static_cast<float>(v));
  for (double& v : w.fold) v = static_cast<double>(static_cast<float>(v));

  std::ostringstream out;
  write_stem_weights(w, cfg, out);
  std::istringstream in(out.str());
  StemConfig back_cfg;
  const StemWeights back = read_stem_weights(in, back_cfg);
  CHECK(back_cfg.out_channels == cfg.out_channels);
  CHECK(back_cfg.bands == cfg.bands);
  CHECK(back_cfg.spectral_kernel == cfg.spectral_kernel);
  CHECK(back_cfg.spatial_kernel == cfg.spatial_kernel);
  CHECK(back.conv3d == w.conv3d);
  CHECK(back.fold == w.fold);

  std::istringstream bad("MSC1xxxx");
  StemConfig ignored;
  CHECK_THROWS_AS(read_stem_weights(bad, ignored), std::runtime_error);
}

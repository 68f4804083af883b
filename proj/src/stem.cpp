#include "obt/stem.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "obt/rng.hpp"

namespace obt {

namespace {

void check_config(const StemConfig& c) {
  if (c.bands < 1 || c.out_channels < 1) {
    throw std::invalid_argument("stem: bands and out_channels must be positive");
  }
  if (c.spectral_kernel % 2 == 0 || c.spatial_kernel % 2 == 0) {
    throw std::invalid_argument("stem: kernels must be odd");
  }
}

std::size_t conv3d_size(const StemConfig& c) {
  return static_cast<std::size_t>(c.out_channels) * c.spectral_kernel * c.spatial_kernel *
         c.spatial_kernel;
}

std::size_t fold_size(const StemConfig& c) {
  return static_cast<std::size_t>(c.out_channels) * c.bands;
}

void check_shapes(const SpectralCube& cube, const StemWeights& w, const StemConfig& c) {
  check_config(c);
  if (cube.bands != c.bands) {
    throw std::invalid_argument("stem: cube band count does not match config");
  }
  if (cube.height % 4 != 0 || cube.width % 4 != 0) {
    throw std::invalid_argument("stem: height and width must be divisible by 4");
  }
  if (w.conv3d.size() != conv3d_size(c) || w.fold.size() != fold_size(c)) {
    throw std::invalid_argument("stem: weight tensor sizes do not match config");
  }
}

FeatureMap max_pool_3x3s2(const FeatureMap& in) {
  FeatureMap out;
  out.channels = in.channels;
  out.height = (in.height + 2 - 3) / 2 + 1;
  out.width = (in.width + 2 - 3) / 2 + 1;
  out.values.assign(static_cast<std::size_t>(out.channels) * out.height * out.width, 0.0);
  for (int c = 0; c < in.channels; ++c) {
    for (int oy = 0; oy < out.height; ++oy) {
      for (int ox = 0; ox < out.width; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        for (int ky = 0; ky < 3; ++ky) {
          const int y = oy * 2 - 1 + ky;
          if (y < 0 || y >= in.height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int x = ox * 2 - 1 + kx;
            if (x < 0 || x >= in.width) continue;
            best = std::max(best, in.at(c, y, x));
          }
        }
        out.values[(static_cast<std::size_t>(c) * out.height + oy) * out.width + ox] = best;
      }
    }
  }
  return out;
}

}  // namespace

StemParamCount param_count(const StemConfig& config) {
  check_config(config);
  StemParamCount c;
  c.conv3d = static_cast<long long>(config.out_channels) * 1 * config.spectral_kernel *
             config.spatial_kernel * config.spatial_kernel;
  c.fold = static_cast<long long>(config.bands) * config.out_channels;
  c.total = c.conv3d + c.fold;
  return c;
}

long long param_count_2d(int in_channels, int out_channels, int kernel) {
  return static_cast<long long>(in_channels) * out_channels * kernel * kernel;
}

StemWeights random_weights(const StemConfig& config, std::uint64_t seed) {
  check_config(config);
  Rng rng(seed);
  StemWeights w;
  w.conv3d.resize(conv3d_size(config));
  w.fold.resize(fold_size(config));
  const double scale =
      1.0 / std::sqrt(static_cast<double>(config.spectral_kernel) * config.spatial_kernel *
                      config.spatial_kernel);
  for (double& v : w.conv3d) v = rng.uniform(-scale, scale);
  for (double& v : w.fold) v = rng.uniform(-1.0, 1.0);
  return w;
}

FeatureVolume forward_conv3d(const SpectralCube& cube, const StemWeights& weights,
                             const StemConfig& config) {
  check_shapes(cube, weights, config);
  const int d = config.out_channels;
  const int ks = config.spectral_kernel;
  const int k = config.spatial_kernel;
  const int ps = config.spectral_padding();
  const int pp = config.spatial_padding();

  FeatureVolume out;
  out.channels = d;
  out.depth = (config.bands + 2 * ps - ks) / config.spectral_stride + 1;
  out.height = (cube.height + 2 * pp - k) / config.spatial_stride + 1;
  out.width = (cube.width + 2 * pp - k) / config.spatial_stride + 1;
  out.values.assign(
      static_cast<std::size_t>(d) * out.depth * out.height * out.width, 0.0);

  for (int oc = 0; oc < d; ++oc) {
    const double* w = weights.conv3d.data() +
                      static_cast<std::size_t>(oc) * ks * k * k;
    for (int m = 0; m < out.depth; ++m) {
      for (int oy = 0; oy < out.height; ++oy) {
        for (int ox = 0; ox < out.width; ++ox) {
          double acc = 0.0;
          for (int s = 0; s < ks; ++s) {
            const int band = m * config.spectral_stride - ps + s;
            if (band < 0 || band >= cube.bands) continue;
            for (int ky = 0; ky < k; ++ky) {
              const int y = oy * config.spatial_stride - pp + ky;
              if (y < 0 || y >= cube.height) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int x = ox * config.spatial_stride - pp + kx;
                if (x < 0 || x >= cube.width) continue;
                acc += w[(static_cast<std::size_t>(s) * k + ky) * k + kx] *
                       static_cast<double>(cube.at(band, y, x));
              }
            }
          }
          out.values[((static_cast<std::size_t>(oc) * out.depth + m) * out.height + oy) *
                         out.width +
                     ox] = acc;
        }
      }
    }
  }
  return out;
}

FeatureMap forward_prepool(const SpectralCube& cube, const StemWeights& weights,
                           const StemConfig& config) {
  const FeatureVolume vol = forward_conv3d(cube, weights, config);
  if (vol.depth != config.bands) {
    throw std::invalid_argument("stem: fold expects the spectral dimension preserved");
  }
  FeatureMap out;
  out.channels = vol.channels;
  out.height = vol.height;
  out.width = vol.width;
  out.values.assign(static_cast<std::size_t>(out.channels) * out.height * out.width, 0.0);
  const std::size_t plane = static_cast<std::size_t>(vol.height) * vol.width;
  for (int c = 0; c < vol.channels; ++c) {
    for (int s = 0; s < vol.depth; ++s) {
      const double f = weights.fold[static_cast<std::size_t>(c) * config.bands + s];
      const double* src = vol.values.data() +
                          (static_cast<std::size_t>(c) * vol.depth + s) * plane;
      double* dst = out.values.data() + static_cast<std::size_t>(c) * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] += f * src[i];
    }
  }
  return out;
}

FeatureMap forward(const SpectralCube& cube, const StemWeights& weights,
                   const StemConfig& config) {
  return max_pool_3x3s2(forward_prepool(cube, weights, config));
}

FeatureMap forward_rgb_stem(const SpectralCube& image, const std::vector<double>& rgb2d,
                            int out_channels, int kernel) {
  if (image.bands != 3) {
    throw std::invalid_argument("forward_rgb_stem: image must have 3 bands");
  }
  if (rgb2d.size() != static_cast<std::size_t>(out_channels) * 3 * kernel * kernel) {
    throw std::invalid_argument("forward_rgb_stem: weight size mismatch");
  }
  const int pad = (kernel - 1) / 2;
  FeatureMap pre;
  pre.channels = out_channels;
  pre.height = (image.height + 2 * pad - kernel) / 2 + 1;
  pre.width = (image.width + 2 * pad - kernel) / 2 + 1;
  pre.values.assign(static_cast<std::size_t>(out_channels) * pre.height * pre.width, 0.0);
  for (int oc = 0; oc < out_channels; ++oc) {
    for (int oy = 0; oy < pre.height; ++oy) {
      for (int ox = 0; ox < pre.width; ++ox) {
        double acc = 0.0;
        for (int c = 0; c < 3; ++c) {
          for (int ky = 0; ky < kernel; ++ky) {
            const int y = oy * 2 - pad + ky;
            if (y < 0 || y >= image.height) continue;
            for (int kx = 0; kx < kernel; ++kx) {
              const int x = ox * 2 - pad + kx;
              if (x < 0 || x >= image.width) continue;
              acc += rgb2d[((static_cast<std::size_t>(oc) * 3 + c) * kernel + ky) * kernel + kx] *
                     static_cast<double>(image.at(c, y, x));
            }
          }
        }
        pre.values[(static_cast<std::size_t>(oc) * pre.height + oy) * pre.width + ox] = acc;
      }
    }
  }
  return max_pool_3x3s2(pre);
}

StemWeights import_rgb_weights(const std::vector<double>& rgb2d, const StemConfig& config) {
  check_config(config);
  if (config.spectral_kernel != 3) {
    throw std::invalid_argument(
        "import_rgb_weights: spectral kernel must equal the RGB channel count (3)");
  }
  const std::size_t expected = static_cast<std::size_t>(config.out_channels) * 3 *
                               config.spatial_kernel * config.spatial_kernel;
  if (rgb2d.size() != expected) {
    throw std::invalid_argument("import_rgb_weights: weight size mismatch");
  }
  StemWeights w;
  w.conv3d = rgb2d;  // [D][3][k][k] and [D][1][3][k][k] share a layout
  w.fold.assign(fold_size(config), 1.0 / static_cast<double>(config.bands));
  return w;
}

StemGradients weight_gradients(const SpectralCube& cube, const StemWeights& weights,
                               const StemConfig& config) {
  check_shapes(cube, weights, config);
  const FeatureVolume vol = forward_conv3d(cube, weights, config);
  FeatureMap pre;
  pre.channels = vol.channels;
  pre.height = vol.height;
  pre.width = vol.width;
  pre.values.assign(static_cast<std::size_t>(pre.channels) * pre.height * pre.width, 0.0);
  const std::size_t plane = static_cast<std::size_t>(vol.height) * vol.width;
  for (int c = 0; c < vol.channels; ++c) {
    for (int s = 0; s < vol.depth; ++s) {
      const double f = weights.fold[static_cast<std::size_t>(c) * config.bands + s];
      const double* src = vol.values.data() +
                          (static_cast<std::size_t>(c) * vol.depth + s) * plane;
      double* dst = pre.values.data() + static_cast<std::size_t>(c) * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] += f * src[i];
    }
  }

  // d(sum)/d(pre): route 1 through each pooled cell's argmax (first in scan
  // order on ties, matching the forward pass exactly).
  std::vector<double> dpre(pre.values.size(), 0.0);
  const int ph = (pre.height + 2 - 3) / 2 + 1;
  const int pw = (pre.width + 2 - 3) / 2 + 1;
  for (int c = 0; c < pre.channels; ++c) {
    for (int oy = 0; oy < ph; ++oy) {
      for (int ox = 0; ox < pw; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        int by = -1, bx = -1;
        for (int ky = 0; ky < 3; ++ky) {
          const int y = oy * 2 - 1 + ky;
          if (y < 0 || y >= pre.height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int x = ox * 2 - 1 + kx;
            if (x < 0 || x >= pre.width) continue;
            const double v = pre.at(c, y, x);
            if (v > best) {
              best = v;
              by = y;
              bx = x;
            }
          }
        }
        if (by >= 0) {
          dpre[(static_cast<std::size_t>(c) * pre.height + by) * pre.width + bx] += 1.0;
        }
      }
    }
  }

  StemGradients g;
  g.conv3d.assign(weights.conv3d.size(), 0.0);
  g.fold.assign(weights.fold.size(), 0.0);

  // Fold gradients and the volume-level upstream gradient.
  std::vector<double> dvol(vol.values.size(), 0.0);
  for (int c = 0; c < vol.channels; ++c) {
    for (int s = 0; s < vol.depth; ++s) {
      const double f = weights.fold[static_cast<std::size_t>(c) * config.bands + s];
      const double* vsrc = vol.values.data() +
                           (static_cast<std::size_t>(c) * vol.depth + s) * plane;
      const double* dsrc = dpre.data() + static_cast<std::size_t>(c) * plane;
      double* ddst = dvol.data() + (static_cast<std::size_t>(c) * vol.depth + s) * plane;
      double acc = 0.0;
      for (std::size_t i = 0; i < plane; ++i) {
        acc += dsrc[i] * vsrc[i];
        ddst[i] = dsrc[i] * f;
      }
      g.fold[static_cast<std::size_t>(c) * config.bands + s] = acc;
    }
  }

  // Conv gradients: correlate the upstream volume gradient with the input.
  const int ks = config.spectral_kernel;
  const int k = config.spatial_kernel;
  const int ps = config.spectral_padding();
  const int pp = config.spatial_padding();
  for (int oc = 0; oc < vol.channels; ++oc) {
    double* gw = g.conv3d.data() + static_cast<std::size_t>(oc) * ks * k * k;
    for (int m = 0; m < vol.depth; ++m) {
      for (int oy = 0; oy < vol.height; ++oy) {
        for (int ox = 0; ox < vol.width; ++ox) {
          const double up =
              dvol[((static_cast<std::size_t>(oc) * vol.depth + m) * vol.height + oy) *
                       vol.width +
                   ox];
          if (up == 0.0) continue;
          for (int s = 0; s < ks; ++s) {
            const int band = m * config.spectral_stride - ps + s;
            if (band < 0 || band >= cube.bands) continue;
            for (int ky = 0; ky < k; ++ky) {
              const int y = oy * config.spatial_stride - pp + ky;
              if (y < 0 || y >= cube.height) continue;
              for (int kx = 0; kx < k; ++kx) {
                const int x = ox * config.spatial_stride - pp + kx;
                if (x < 0 || x >= cube.width) continue;
                gw[(static_cast<std::size_t>(s) * k + ky) * k + kx] +=
                    up * static_cast<double>(cube.at(band, y, x));
              }
            }
          }
        }
      }
    }
  }
  return g;
}

namespace {

double forward_sum(const SpectralCube& cube, const StemWeights& weights,
                   const StemConfig& config) {
  const FeatureMap out = forward(cube, weights, config);
  double acc = 0.0;
  for (double v : out.values) acc += v;
  return acc;
}

double relative_error(double a, double b) {
  const double mag = std::max(std::fabs(a), std::fabs(b));
  if (mag < 1e-10) return 0.0;
  return std::fabs(a - b) / mag;
}

}  // namespace

double grad_check(const SpectralCube& cube, const StemWeights& weights,
                  const StemConfig& config) {
  constexpr double kStep = 1e-5;
  const StemGradients analytic = weight_gradients(cube, weights, config);
  StemWeights probe = weights;
  double max_err = 0.0;

  auto check_tensor = [&](std::vector<double>& values, const std::vector<double>& grads) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + kStep;
      const double fp = forward_sum(cube, probe, config);
      values[i] = saved - kStep;
      const double fm = forward_sum(cube, probe, config);
      values[i] = saved;
      const double numeric = (fp - fm) / (2.0 * kStep);
      max_err = std::max(max_err, relative_error(numeric, grads[i]));
    }
  };
  check_tensor(probe.conv3d, analytic.conv3d);
  check_tensor(probe.fold, analytic.fold);
  return max_err;
}

double grad_check_seeded(const StemConfig& config, std::uint64_t seed) {
  Rng rng = Rng(seed).split("grad-check");
  SpectralCube cube;
  cube.bands = config.bands;
  cube.height = 16;
  cube.width = 16;
  cube.values.resize(static_cast<std::size_t>(cube.bands) * cube.height * cube.width);
  for (float& v : cube.values) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  const StemWeights weights = random_weights(config, rng.next_u64());
  return grad_check(cube, weights, config);
}

namespace {

std::uint32_t read_u32le_stream(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("stem weights: short read");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32le_stream(std::uint32_t v, std::ostream& out) {
  const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

StemWeights read_stem_weights(std::istream& in, StemConfig& config_out) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "STW1", 4) != 0) {
    throw std::runtime_error("stem weights: bad magic, expected STW1");
  }
  StemConfig c;
  c.out_channels = static_cast<int>(read_u32le_stream(in));
  c.bands = static_cast<int>(read_u32le_stream(in));
  c.spectral_kernel = static_cast<int>(read_u32le_stream(in));
  c.spatial_kernel = static_cast<int>(read_u32le_stream(in));
  check_config(c);
  StemWeights w;
  w.conv3d.resize(conv3d_size(c));
  w.fold.resize(fold_size(c));
  auto read_f32s = [&](std::vector<double>& dst) {
    std::vector<unsigned char> raw(dst.size() * 4);
    if (!in.read(reinterpret_cast<char*>(raw.data()),
                 static_cast<std::streamsize>(raw.size()))) {
      throw std::runtime_error("stem weights: short read in payload");
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
      std::uint32_t u = static_cast<std::uint32_t>(raw[i * 4]) |
                        (static_cast<std::uint32_t>(raw[i * 4 + 1]) << 8) |
                        (static_cast<std::uint32_t>(raw[i * 4 + 2]) << 16) |
                        (static_cast<std::uint32_t>(raw[i * 4 + 3]) << 24);
      float f;
      std::memcpy(&f, &u, 4);
      dst[i] = static_cast<double>(f);
    }
  };
  read_f32s(w.conv3d);
  read_f32s(w.fold);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("stem weights: trailing data");
  }
  config_out = c;
  return w;
}

void write_stem_weights(const StemWeights& weights, const StemConfig& config,
                        std::ostream& out) {
  out.write("STW1", 4);
  write_u32le_stream(static_cast<std::uint32_t>(config.out_channels), out);
  write_u32le_stream(static_cast<std::uint32_t>(config.bands), out);
  write_u32le_stream(static_cast<std::uint32_t>(config.spectral_kernel), out);
  write_u32le_stream(static_cast<std::uint32_t>(config.spatial_kernel), out);
  auto write_f32s = [&](const std::vector<double>& src) {
    std::vector<unsigned char> raw(src.size() * 4);
    for (std::size_t i = 0; i < src.size(); ++i) {
      float f = static_cast<float>(src[i]);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      raw[i * 4] = static_cast<unsigned char>(u & 0xff);
      raw[i * 4 + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
      raw[i * 4 + 2] = static_cast<unsigned char>((u >> 16) & 0xff);
      raw[i * 4 + 3] = static_cast<unsigned char>((u >> 24) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
  };
  write_f32s(weights.conv3d);
  write_f32s(weights.fold);
}

}  // namespace obt

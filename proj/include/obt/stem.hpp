#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "obt/dataio.hpp"

namespace obt {

struct StemConfig {
  int bands = 8;
  int spectral_kernel = 3;
  int spatial_kernel = 7;
  int out_channels = 64;
  int spatial_stride = 2;
  int spectral_stride = 1;

  int spatial_padding() const { return (spatial_kernel - 1) / 2; }
  int spectral_padding() const { return (spectral_kernel - 1) / 2; }
};

// conv3d is [D][1][k_s][k][k]; fold holds D depthwise spectral kernels of
// length `bands`. No bias terms anywhere.
struct StemWeights {
  std::vector<double> conv3d;
  std::vector<double> fold;
};

struct StemParamCount {
  long long conv3d = 0;
  long long fold = 0;
  long long total = 0;
};

StemParamCount param_count(const StemConfig& config);

// Plain 2D stem equivalent: in_channels * out_channels * k * k.
long long param_count_2d(int in_channels, int out_channels, int kernel);

// [C][H][W] feature map.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

// [C][S][H][W] spectral-spatial volume (the stage-1 output).
struct FeatureVolume {
  int channels = 0;
  int depth = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  double at(int c, int s, int y, int x) const {
    return values[((static_cast<std::size_t>(c) * depth + s) * height + y) * width + x];
  }
};

StemWeights random_weights(const StemConfig& config, std::uint64_t seed);

// Stage 1 only: 3D cross-correlation, stride (1, 2, 2), zero padding.
FeatureVolume forward_conv3d(const SpectralCube& cube, const StemWeights& weights,
                             const StemConfig& config);

// Stages 1+2: conv then depthwise spectral fold; D x H/2 x W/2.
FeatureMap forward_prepool(const SpectralCube& cube, const StemWeights& weights,
                           const StemConfig& config);

// All three stages (conv, fold, 3x3/2 max-pool); D x H/4 x W/4.
FeatureMap forward(const SpectralCube& cube, const StemWeights& weights,
                   const StemConfig& config);

// Reference 2D RGB stem: conv k x k stride 2 (zero padding (k-1)/2) plus the
// same max-pool. rgb2d is [D][3][k][k]; image is a 3-band cube.
FeatureMap forward_rgb_stem(const SpectralCube& image, const std::vector<double>& rgb2d,
                            int out_channels, int kernel);

// Copies [D][3][k][k] RGB weights into the conv3d slot (channel axis becomes
// the spectral axis). Requires spectral_kernel == 3. The fold slot is not
// derived from the input; it is left at the uniform 1/bands initialization.
StemWeights import_rgb_weights(const std::vector<double>& rgb2d, const StemConfig& config);

struct StemGradients {
  std::vector<double> conv3d;
  std::vector<double> fold;
};

// Analytic gradient of sum(forward(...)) with respect to all weights.
StemGradients weight_gradients(const SpectralCube& cube, const StemWeights& weights,
                               const StemConfig& config);

// Max relative error between the analytic gradient and central finite
// differences (step 1e-5) over every weight.
double grad_check(const SpectralCube& cube, const StemWeights& weights,
                  const StemConfig& config);

// Seeded fixture: random small cube and weights derived from `seed`.
double grad_check_seeded(const StemConfig& config, std::uint64_t seed);

// STW1 container (MSC1 endianness rules): magic, u32 D, bands, k_s, k,
// then conv3d and fold as little-endian f32.
StemWeights read_stem_weights(std::istream& in, StemConfig& config_out);
void write_stem_weights(const StemWeights& weights, const StemConfig& config, std::ostream& out);

}  // namespace obt

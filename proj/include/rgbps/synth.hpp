#pragma once

#include "rgbps/field.hpp"
#include "rgbps/lighting.hpp"

#include <cstdint>

namespace rgbps {

struct SynthConfig {
  int image_size = 256;
  int coarse_size = 16;
  double noise_sigma = 0.001;
  /// Std of the coarse Gaussian depth field, in units of the coarse cell
  /// spacing, so gradient statistics do not depend on image_size.
  double amplitude = 0.14;
  /// Base-plane tilt is drawn uniformly from [0, max_tilt_deg].
  double max_tilt_deg = 25.0;
  /// Base plane is resampled until min over lights of l^T n_plane exceeds this.
  double min_light_dot = 0.1;
  double albedo_min = 0.2;
  double albedo_max = 1.0;

  void validate() const;
};

/// Splitmix64 mixing; derives independent stream seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Which of the four diagonal triangles pixel (x, y) belongs to:
/// 0 top, 1 left, 2 right, 3 bottom. Pixels on a diagonal go to the first
/// region in that order that contains them.
int triangle_region(int x, int y, int size);

/// Distance in pixels from the center of (x, y) to the nearest image diagonal.
double diagonal_distance(int x, int y, int size);

/// Piecewise-constant albedo over the four diagonal triangles, each channel
/// drawn uniformly from [albedo_min, albedo_max].
AlbedoMap gen_albedo(int size, std::uint64_t seed, double albedo_min = 0.2, double albedo_max = 1.0);

struct SynthSurface {
  ScalarMap depth;
  GradientField gradients;
  NormalField normals;
  Eigen::Vector3d plane_normal;
};

/// Random base plane plus a bicubic (Catmull-Rom) upsampled coarse Gaussian
/// field. Gradients and normals are analytic derivatives of the interpolant.
/// Throws std::runtime_error if no admissible base plane is found in 1000 draws.
SynthSurface gen_surface(const SynthConfig& config, const LightingRig& rig, std::uint64_t seed);

struct SynthInstance {
  RgbImage image;
  NormalField normals;
  AlbedoMap albedo;
  ScalarMap depth;
};

/// Albedo, surface and noisy render; deterministic per seed.
SynthInstance gen_instance(const SynthConfig& config, const LightingRig& rig, std::uint64_t seed);

}  // namespace rgbps

#include "rgbps/synth.hpp"

#include "rgbps/render.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace rgbps {

namespace {

struct CubicTaps {
  std::array<int, 4> index;
  std::array<double, 4> weight;
  std::array<double, 4> slope;  // d weight / d t
};

// Catmull-Rom taps at coarse coordinate t, clamped to [0, n).
CubicTaps catmull_rom(double t, int n) {
  const double base = std::floor(t);
  const double f = t - base;
  const int i0 = int(base);
  CubicTaps taps;
  const double f2 = f * f, f3 = f2 * f;
  taps.weight = {0.5 * (-f3 + 2 * f2 - f), 0.5 * (3 * f3 - 5 * f2 + 2), 0.5 * (-3 * f3 + 4 * f2 + f), 0.5 * (f3 - f2)};
  taps.slope = {0.5 * (-3 * f2 + 4 * f - 1), 0.5 * (9 * f2 - 10 * f), 0.5 * (-9 * f2 + 8 * f + 1), 0.5 * (3 * f2 - 2 * f)};
  for (int k = 0; k < 4; ++k) taps.index[std::size_t(k)] = std::clamp(i0 - 1 + k, 0, n - 1);
  return taps;
}

}  // namespace

void SynthConfig::validate() const {
  if (image_size < 2) throw InputError("synth: image_size must be >= 2");
  if (coarse_size < 2 || coarse_size > image_size) throw InputError("synth: coarse_size must be in [2, image_size]");
  if (!(noise_sigma >= 0.0)) throw InputError("synth: noise_sigma must be >= 0");
  if (!(amplitude >= 0.0)) throw InputError("synth: amplitude must be >= 0");
  if (!(max_tilt_deg >= 0.0 && max_tilt_deg < 90.0)) throw InputError("synth: max_tilt_deg must be in [0, 90)");
  if (!(albedo_min >= 0.0 && albedo_max >= albedo_min)) throw InputError("synth: invalid albedo range");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int triangle_region(int x, int y, int size) {
  const int rx = size - 1 - x;
  const int ry = size - 1 - y;
  if (y <= x && y <= rx) return 0;
  if (x <= y && x <= ry) return 1;
  if (rx <= y && rx <= ry) return 2;
  return 3;
}

double diagonal_distance(int x, int y, int size) {
  const double main = std::abs(double(y) - double(x));
  const double anti = std::abs(double(y) - double(size - 1 - x));
  return std::min(main, anti) / std::numbers::sqrt2;
}

AlbedoMap gen_albedo(int size, std::uint64_t seed, double albedo_min, double albedo_max) {
  if (size < 2) throw InputError("gen_albedo: size must be >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(albedo_min, albedo_max);
  std::array<Eigen::Vector3d, 4> regions;
  for (auto& r : regions) r << uniform(rng), uniform(rng), uniform(rng);

  AlbedoMap albedo(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) albedo(x, y) = regions[std::size_t(triangle_region(x, y, size))];
  }
  return albedo;
}

SynthSurface gen_surface(const SynthConfig& config, const LightingRig& rig, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double max_tilt = config.max_tilt_deg * std::numbers::pi / 180.0;
  Eigen::Vector3d plane;
  bool found = false;
  for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
    const double tilt = max_tilt * unit(rng);
    const double azimuth = 2.0 * std::numbers::pi * unit(rng);
    plane << std::sin(tilt) * std::cos(azimuth), std::sin(tilt) * std::sin(azimuth), std::cos(tilt);
    found = (rig.matrix().transpose() * plane).minCoeff() > config.min_light_dot;
  }
  if (!found) throw std::runtime_error("gen_surface: no unshadowed base plane found in 1000 attempts");

  const int n = config.image_size;
  const int nc = config.coarse_size;
  const double cell = double(n) / nc;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd coarse(nc, nc);  // (row = y, col = x)
  for (int j = 0; j < nc; ++j) {
    for (int i = 0; i < nc; ++i) coarse(j, i) = gauss(rng);
  }
  const double scale = config.amplitude * cell;

  std::vector<CubicTaps> taps(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) taps[std::size_t(p)] = catmull_rom((p + 0.5) / cell - 0.5, nc);

  const Eigen::Vector2d tilt_gradient = gradient_from_normal(plane);
  const double center = 0.5 * (n - 1);

  SynthSurface out{ScalarMap(n, n), GradientField(n, n), NormalField(n, n), plane};
  for (int y = 0; y < n; ++y) {
    const auto& ty = taps[std::size_t(y)];
    for (int x = 0; x < n; ++x) {
      const auto& tx = taps[std::size_t(x)];
      double z = 0.0, zx = 0.0, zy = 0.0;
      for (int b = 0; b < 4; ++b) {
        for (int a = 0; a < 4; ++a) {
          const double v = coarse(ty.index[std::size_t(b)], tx.index[std::size_t(a)]);
          z += tx.weight[std::size_t(a)] * ty.weight[std::size_t(b)] * v;
          zx += tx.slope[std::size_t(a)] * ty.weight[std::size_t(b)] * v;
          zy += tx.weight[std::size_t(a)] * ty.slope[std::size_t(b)] * v;
        }
      }
      const Eigen::Vector2d g = tilt_gradient + (scale / cell) * Eigen::Vector2d(zx, zy);
      out.depth(x, y)(0) = tilt_gradient.dot(Eigen::Vector2d(x - center, y - center)) + scale * z;
      out.gradients(x, y) = g;
      out.normals(x, y) = normal_from_gradient(g);
    }
  }
  return out;
}

SynthInstance gen_instance(const SynthConfig& config, const LightingRig& rig, std::uint64_t seed) {
  config.validate();
  SynthInstance inst;
  inst.albedo = gen_albedo(config.image_size, derive_seed(seed, 0), config.albedo_min, config.albedo_max);
  SynthSurface surface = gen_surface(config, rig, derive_seed(seed, 1));
  inst.normals = std::move(surface.normals);
  inst.depth = std::move(surface.depth);
  inst.image = render(inst.normals, inst.albedo, rig, config.noise_sigma, derive_seed(seed, 2));
  return inst;
}

}  // namespace rgbps

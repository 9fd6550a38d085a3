#pragma once

#include "rgbps/field.hpp"
#include "rgbps/lighting.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>

namespace rgbps {

/// Lambertian RGB photometric-stereo image formation:
///   v(p) = diag(albedo(p)) * max(L^T n(p), 0) + N(0, noise_sigma^2)
/// Noise is added per channel after shadow clipping and is not re-clipped.
/// Output mask is the intersection of the input masks; masked-out pixels are 0.
RgbImage render(const NormalField& normals, const AlbedoMap& albedo, const LightingRig& rig,
                double noise_sigma = 0.0, std::uint64_t seed = 0);

/// Noiseless shading of a single pixel, with attached-shadow clipping.
Eigen::Vector3d render_pixel(const Eigen::Vector3d& normal, const Eigen::Vector3d& albedo, const LightingRig& rig);

inline Eigen::Vector3d normal_from_gradient(const Eigen::Vector2d& g) {
  return Eigen::Vector3d(g.x(), g.y(), 1.0) / std::sqrt(1.0 + g.squaredNorm());
}

inline Eigen::Vector2d gradient_from_normal(const Eigen::Vector3d& n) {
  return Eigen::Vector2d(n.x() / n.z(), n.y() / n.z());
}

/// n = [g, 1] / |[g, 1]| -> g. Throws InputError listing the offending pixels
/// when any masked-in normal has n_z <= eps.
GradientField normals_to_gradients(const NormalField& normals, double eps = 1e-6);

NormalField gradients_to_normals(const GradientField& gradients);

}  // namespace rgbps

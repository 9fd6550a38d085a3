#pragma once

#include "rgbps/field.hpp"
#include "rgbps/lighting.hpp"
#include "rgbps/patch_basis.hpp"
#include "rgbps/render.hpp"

#include <Eigen/Core>

#include <random>

namespace rgbps::support {

inline Eigen::Vector3d random_unit(std::mt19937_64& rng, double min_z = 0.1) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Eigen::Vector3d v(g(rng), g(rng), g(rng));
    if (v.norm() < 1e-3) continue;
    v.normalize();
    if (v.z() < 0) v.z() = -v.z();
    if (v.z() > min_z) return v;
  }
}

inline Eigen::Vector3d random_chroma(std::mt19937_64& rng, double min_component = 0.1) {
  std::uniform_real_distribution<double> u(min_component, 1.0);
  return Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized();
}

/// Random coefficients of a degree <= D polynomial whose gradient stays
/// moderate (|g| of order `slope`) across the patch.
inline Eigen::VectorXd random_coeffs(std::mt19937_64& rng, const PatchGeometry& geometry, double slope = 0.3) {
  std::normal_distribution<double> g(0.0, 1.0);
  const auto terms = geometry.monomials();
  const double half = 0.5 * geometry.patch_side;
  Eigen::VectorXd a(Eigen::Index(terms.size()));
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const int degree = terms[j].dx + terms[j].dy;
    a(Eigen::Index(j)) = slope * g(rng) / (degree * std::pow(half, degree - 1));
  }
  return a;
}

/// Depth-polynomial rendered patch as a side x side image with constant albedo.
inline RgbImage render_patch(const Eigen::Matrix3Xd& normals, int side, const Eigen::Vector3d& albedo,
                             const LightingRig& rig) {
  RgbImage image(side, side);
  for (Eigen::Index i = 0; i < normals.cols(); ++i) image[i] = render_pixel(normals.col(i), albedo, rig);
  return image;
}

inline bool unshadowed(const Eigen::Matrix3Xd& normals, const LightingRig& rig, double margin = 0.05) {
  return (rig.matrix().transpose() * normals).minCoeff() > margin;
}

inline double angle_deg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0)) * 180.0 / M_PI;
}

}  // namespace rgbps::support

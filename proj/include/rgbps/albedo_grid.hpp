#pragma once

#include <Eigen/Core>

#include <cmath>

namespace rgbps {

/// Albedo factored as luminance times unit nonnegative chromaticity.
struct AlbedoCandidate {
  double tau = 0.0;
  Eigen::Vector3d chroma = Eigen::Vector3d::Constant(1.0 / std::sqrt(3.0));

  Eigen::Vector3d albedo() const { return tau * chroma; }
  /// Splits a nonnegative, nonzero albedo vector into (|k|, k / |k|).
  static AlbedoCandidate from_albedo(const Eigen::Vector3d& albedo);
};

/// Discretization of albedo space: chromaticity bins uniform in elevation and
/// azimuth over the positive octant of the sphere, luminance bins uniform over
/// (0, tau_max]. All bins are center-of-cell, so every chromaticity center has
/// strictly positive components.
///
/// Chromaticity index c = elev * n_azim + azim.
struct AlbedoGrid {
  int n_elev = 64;
  int n_azim = 64;
  int n_lum = 100;
  double tau_max = 3.0;

  /// Throws InputError unless all counts >= 1 and tau_max > 0.
  void validate() const;

  int chroma_count() const { return n_elev * n_azim; }
  double lum_bin_width() const { return tau_max / n_lum; }

  /// (sin t cos f, sin t sin f, cos t) at the bin-center angles. Throws
  /// InputError for out-of-range indices.
  Eigen::Vector3d chroma_center(int elev, int azim) const;
  Eigen::Vector3d chroma_center(int chroma_index) const;
  double tau_center(int lum) const;

  /// Nearest luminance bin center, clamped to [0, n_lum - 1]. A value exactly
  /// on the boundary between two bins maps to the lower bin.
  int quantize_tau(double tau) const;
};

}  // namespace rgbps

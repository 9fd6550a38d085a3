#pragma once

#include "rgbps/field.hpp"
#include "rgbps/lighting.hpp"

#include <array>
#include <vector>

namespace rgbps {

struct ErrorReport {
  /// Angular error in degrees; valid on the intersection of the input masks.
  ScalarMap errors;
  double median = 0.0;
  double mean = 0.0;
  Eigen::Index count = 0;

  /// Fraction of valid pixels with error <= each threshold (degrees).
  std::vector<double> cdf(const std::vector<double>& thresholds) const;
};

/// Per pixel acos(clamp(a . b, -1, 1)) in degrees. Throws InputError on a
/// shape mismatch or an empty mask intersection.
ErrorReport angular_error(const NormalField& estimate, const NormalField& truth);

/// Median of a sample (mean of the two middle values for even sizes).
double median(std::vector<double> values);

/// Evenly spaced CDF thresholds 0, step, ..., max_deg.
std::vector<double> cdf_thresholds(double max_deg = 90.0, double step = 0.5);

/// Captures[i] is the RGB image under white light i alone. Non-finite
/// measurements are treated as missing.
using LightCaptures = std::array<RgbImage, 3>;

struct ClassicalPsResult {
  NormalField normals;
  /// Pixels with fewer than three usable equations, a rank-deficient system,
  /// or a relative re-rendering residual above the tolerance.
  Mask flagged;
  /// Relative residual |I - diag(k) max(L^T n, 0)| / |I| of the usable equations.
  ScalarMap residual;
};

/// Classical three-light photometric stereo with known albedo. Every channel c
/// with albedo_c > albedo_threshold of every capture i gives an equation
/// albedo_c * l_i^T n = I_ic; the stacked system is solved in least squares
/// and normalized.
ClassicalPsResult classical_ps(const LightCaptures& captures, const AlbedoMap& albedo, const LightingRig& rig,
                               double albedo_threshold = 1e-6, double residual_tolerance = 1e-2);

/// Three white-light captures simulated from a single RGB-multiplexed image
/// and known albedo: capture i has channels albedo_c * v_i / albedo_i. Captures
/// for a light whose channel albedo is below the threshold are NaN.
LightCaptures simulate_white_light_captures(const RgbImage& image, const AlbedoMap& albedo,
                                            double albedo_threshold = 1e-6);

struct DepthResult {
  ScalarMap depth;
  /// RMS of the gradient-equation residuals.
  double rms_residual = 0.0;
  int components = 0;
};

/// Least-squares depth whose finite differences match the gradients of the
/// normal field on the mask. Each difference z(p + e) - z(p) is matched to the
/// integral of the gradient along the edge, using a six-point quadrature
/// within the masked run (exact for polynomial depth up to degree six).
/// Each 4-connected mask component is solved separately and shifted to zero
/// mean. Throws InputError if a masked-in normal has n_z <= eps.
DepthResult integrate_normals(const NormalField& normals, const Mask& mask, double eps = 1e-6);

}  // namespace rgbps

#pragma once

#include "rgbps/albedo_grid.hpp"
#include "rgbps/global_solver.hpp"
#include "rgbps/patch_basis.hpp"
#include "rgbps/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rgbps {

/// Every tunable of the pipeline and the synthetic generator.
///
/// Keys (file and --set overrides use the same names):
///
///   patch_side     patch width in pixels                    8
///   D              polynomial degree of the depth model     5
///   n_elev         chromaticity elevation bins              64
///   n_azim         chromaticity azimuth bins                64
///   n_lum          luminance bins                           100
///   tau_max        upper edge of the luminance range        3
///   K              size of the global albedo set            100
///   h_max          histogram vote ceiling                   1e-4
///   gamma          outlier cost                             4
///   lambda_init    first consensus weight                   2^-64
///   lambda_factor  per-iteration weight multiplier          2^0.5
///   lambda_final   weight ceiling                           256
///   iterations     alternations                             145
///   selection      a-step rule: full | shortcut             full
///   rel_tol        early-stop relative change (0 = off)     0
///   eps_tau        pixel inversion threshold                1e-8
///   mask_threshold background cut, fraction of max luma     0.02
///   seed           master seed                              0
///   noise_sigma    additive Gaussian noise std              0.001
///   image_size     synthetic image width and height         256
///   coarse_size    synthetic coarse depth grid              16
///   amplitude      coarse depth std / coarse cell           0.14
///   max_tilt       base plane tilt bound, degrees           25
///   albedo_min     per-channel albedo lower bound           0.2
///   albedo_max     per-channel albedo upper bound           1
struct PipelineConfig {
  PatchGeometry geometry;
  AlbedoGrid grid;
  int K = 100;
  double h_max = 1e-4;
  SolverConfig solver;
  double eps_tau = 1e-8;
  double mask_threshold = 0.02;
  std::uint64_t seed = 0;
  SynthConfig synth;

  /// Sets one key. Numbers accept decimal, hex-float (0x1p-64) and power
  /// (2^-64) notation. Throws InputError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// Applies "key=value" assignments in order.
  void apply(const std::vector<std::string>& assignments);
  /// Throws InputError when any value is out of range.
  void validate() const;

  /// One "key=value" line per key, in the table order above; values are
  /// written so that loading them back gives identical doubles.
  std::string to_text() const;

  static std::vector<std::string> keys();
  /// Reads key=value lines; '#' starts a comment. The result is validated.
  static PipelineConfig load(const std::filesystem::path& path);
};

/// Parses a double in decimal, hex-float or a^b notation.
double parse_number(const std::string& text);

}  // namespace rgbps

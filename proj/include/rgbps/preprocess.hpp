#pragma once

#include "rgbps/field.hpp"

#include <Eigen/Core>

#include <string>

namespace rgbps {

/// Color of the top-left 2x2 Bayer block, read row by row.
enum class BayerPattern { RGGB, BGGR, GRBG, GBRG };

/// Throws InputError for anything other than RGGB, BGGR, GRBG or GBRG.
BayerPattern parse_bayer_pattern(const std::string& name);

struct PreprocessResult {
  /// White-balanced image; the mask marks the foreground.
  RgbImage image;
  /// Per-channel masked mean before balancing. Multiplying an albedo
  /// estimate by these gains undoes the balancing.
  Eigen::Vector3d gains = Eigen::Vector3d::Ones();
};

/// Linear Bayer mosaic to a half-resolution RGB image: each of the four color
/// sub-planes is blurred with a unit-std Gaussian (radius 3, edges clamped),
/// then every 2x2 block becomes one pixel (R, mean of the two G, B). The
/// result is masked and white-balanced as in preprocess_rgb. Odd trailing rows
/// or columns are dropped. Throws InputError if the mosaic is smaller than
/// 2x2 or the mask is empty.
PreprocessResult preprocess_bayer(const ScalarMap& mosaic, BayerPattern pattern, double mask_threshold = 0.02);

/// Masks pixels whose luminance (channel mean) exceeds mask_threshold times
/// the maximum luminance, then divides every channel by its mean over the
/// mask. Pixels already masked out in the input stay masked out. Throws
/// InputError if the mask is empty or a channel mean is not positive.
PreprocessResult preprocess_rgb(const RgbImage& image, double mask_threshold = 0.02);

}  // namespace rgbps

#pragma once

#include <Eigen/Core>

namespace rgbps {

/// Lighting matrix L = [l_R, l_G, l_B]: each column is a light direction
/// scaled by its intensity, observed only in the matching color channel.
class LightingRig {
 public:
  /// Throws InputError when |det(L)| <= 1e-9 * scale^3, scale = max |L_ij|.
  explicit LightingRig(const Eigen::Matrix3d& lights);

  const Eigen::Matrix3d& matrix() const { return lights_; }
  /// L^{-T}, cached at construction.
  const Eigen::Matrix3d& inverse_transpose() const { return inverse_transpose_; }
  Eigen::Vector3d light(int channel) const { return lights_.col(channel); }

  /// Fixed three-light rig used by the synthetic benchmark: unit lights tilted
  /// 40 degrees from the optical axis at azimuths 0, 120 and 240 degrees.
  static LightingRig benchmark();

 private:
  Eigen::Matrix3d lights_;
  Eigen::Matrix3d inverse_transpose_;
};

}  // namespace rgbps

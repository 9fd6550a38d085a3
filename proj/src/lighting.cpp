#include "rgbps/lighting.hpp"

#include "rgbps/field.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>

namespace rgbps {

LightingRig::LightingRig(const Eigen::Matrix3d& lights) : lights_(lights) {
  if (!lights.allFinite()) throw InputError("lighting matrix has non-finite entries");
  const double scale = lights.cwiseAbs().maxCoeff();
  const double det = lights.determinant();
  if (scale == 0.0 || std::abs(det) <= 1e-9 * scale * scale * scale) {
    throw InputError("lighting matrix is singular");
  }
  inverse_transpose_ = lights.inverse().transpose();
}

LightingRig LightingRig::benchmark() {
  constexpr double tilt = 40.0 * std::numbers::pi / 180.0;
  Eigen::Matrix3d lights;
  for (int c = 0; c < 3; ++c) {
    const double azimuth = c * 2.0 * std::numbers::pi / 3.0;
    lights.col(c) << std::sin(tilt) * std::cos(azimuth), std::sin(tilt) * std::sin(azimuth), std::cos(tilt);
  }
  return LightingRig(lights);
}

}  // namespace rgbps

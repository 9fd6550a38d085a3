#include "rgbps/albedo_grid.hpp"

#include "rgbps/field.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rgbps {

AlbedoCandidate AlbedoCandidate::from_albedo(const Eigen::Vector3d& albedo) {
  if (!albedo.allFinite() || (albedo.array() < 0.0).any()) throw InputError("albedo must be finite and nonnegative");
  const double tau = albedo.norm();
  if (tau == 0.0) throw InputError("albedo must be nonzero");
  return {tau, albedo / tau};
}

void AlbedoGrid::validate() const {
  if (n_elev < 1 || n_azim < 1 || n_lum < 1) throw InputError("albedo grid bin counts must be >= 1");
  if (!(tau_max > 0.0) || !std::isfinite(tau_max)) throw InputError("tau_max must be positive");
}

Eigen::Vector3d AlbedoGrid::chroma_center(int elev, int azim) const {
  if (elev < 0 || elev >= n_elev || azim < 0 || azim >= n_azim) {
    throw InputError("chromaticity index out of range: " + std::to_string(elev) + "," + std::to_string(azim));
  }
  const double theta = (elev + 0.5) * (std::numbers::pi / 2.0) / n_elev;
  const double phi = (azim + 0.5) * (std::numbers::pi / 2.0) / n_azim;
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

Eigen::Vector3d AlbedoGrid::chroma_center(int chroma_index) const {
  if (chroma_index < 0 || chroma_index >= chroma_count()) {
    throw InputError("chromaticity index out of range: " + std::to_string(chroma_index));
  }
  return chroma_center(chroma_index / n_azim, chroma_index % n_azim);
}

double AlbedoGrid::tau_center(int lum) const {
  if (lum < 0 || lum >= n_lum) throw InputError("luminance index out of range: " + std::to_string(lum));
  return (lum + 0.5) * lum_bin_width();
}

int AlbedoGrid::quantize_tau(double tau) const {
  // Bin l covers (l*w, (l+1)*w]; ceil makes boundary values fall to the lower bin.
  const double scaled = std::ceil(tau / lum_bin_width()) - 1.0;
  if (!(scaled > 0.0)) return 0;
  if (scaled >= n_lum - 1) return n_lum - 1;
  return int(scaled);
}

}  // namespace rgbps

#include "rgbps/field.hpp"

#include <cmath>

namespace rgbps {

namespace {

std::string where(Eigen::Index i, int width) {
  return std::to_string(i % width) + "," + std::to_string(i / width);
}

}  // namespace

void validate_image(const RgbImage& image) {
  if (image.empty()) throw InputError("image is empty");
  // Noise can push intensities slightly below zero, so only finiteness is required.
  require_finite(image, "image");
}

void validate_albedo(const AlbedoMap& albedo) {
  if (albedo.empty()) throw InputError("albedo map is empty");
  require_finite(albedo, "albedo");
  for (Eigen::Index i = 0; i < albedo.size(); ++i) {
    if (albedo.valid(i) && (albedo[i].array() < 0.0).any()) {
      throw InputError("albedo: negative value at pixel " + where(i, albedo.width()));
    }
  }
}

void validate_normals(const NormalField& normals) {
  if (normals.empty()) throw InputError("normal field is empty");
  require_finite(normals, "normals");
  for (Eigen::Index i = 0; i < normals.size(); ++i) {
    if (!normals.valid(i)) continue;
    const double len = normals[i].norm();
    if (std::abs(len - 1.0) > 1e-6) {
      throw InputError("normals: non-unit normal at pixel " + where(i, normals.width()));
    }
    if (normals[i].z() <= 0.0) {
      throw InputError("normals: normal facing away from camera at pixel " + where(i, normals.width()));
    }
  }
}

}  // namespace rgbps

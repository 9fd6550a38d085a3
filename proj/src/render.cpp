#include "rgbps/render.hpp"

#include "rgbps/parallel.hpp"

#include <random>
#include <sstream>

namespace rgbps {

Eigen::Vector3d render_pixel(const Eigen::Vector3d& normal, const Eigen::Vector3d& albedo, const LightingRig& rig) {
  const Eigen::Vector3d shading = (rig.matrix().transpose() * normal).cwiseMax(0.0);
  return albedo.cwiseProduct(shading);
}

RgbImage render(const NormalField& normals, const AlbedoMap& albedo, const LightingRig& rig, double noise_sigma,
                std::uint64_t seed) {
  if (!normals.same_shape(albedo)) throw InputError("render: normal and albedo dimensions differ");
  if (!(noise_sigma >= 0.0)) throw InputError("render: noise_sigma must be >= 0");
  require_finite(normals, "render normals");
  require_finite(albedo, "render albedo");

  RgbImage image(normals.width(), normals.height());
  parallel_chunks(image.size(), 4096, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    for (auto i = begin; i < end; ++i) {
      const bool valid = normals.valid(i) && albedo.valid(i);
      image.set_valid(i, valid);
      if (valid) image[i] = render_pixel(normals[i], albedo[i], rig);
    }
  });

  if (noise_sigma > 0.0) {
    // Sequential so the noise pattern does not depend on the thread count.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (Eigen::Index i = 0; i < image.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        const double n = noise(rng);
        if (image.valid(i)) image[i](c) += n;
      }
    }
  }
  return image;
}

GradientField normals_to_gradients(const NormalField& normals, double eps) {
  GradientField gradients(normals.width(), normals.height());
  gradients.set_mask(normals.mask());
  std::vector<Eigen::Index> offenders;
  for (Eigen::Index i = 0; i < normals.size(); ++i) {
    if (!normals.valid(i)) continue;
    if (!(normals[i].z() > eps)) {
      offenders.push_back(i);
      continue;
    }
    gradients[i] = gradient_from_normal(normals[i]);
  }
  if (!offenders.empty()) {
    std::ostringstream msg;
    msg << "normals_to_gradients: " << offenders.size() << " near-horizontal normal(s) at";
    for (std::size_t k = 0; k < offenders.size() && k < 16; ++k) {
      msg << " (" << offenders[k] % normals.width() << "," << offenders[k] / normals.width() << ")";
    }
    if (offenders.size() > 16) msg << " ...";
    throw InputError(msg.str());
  }
  return gradients;
}

NormalField gradients_to_normals(const GradientField& gradients) {
  NormalField normals(gradients.width(), gradients.height());
  normals.set_mask(gradients.mask());
  for (Eigen::Index i = 0; i < gradients.size(); ++i) {
    if (gradients.valid(i)) normals[i] = normal_from_gradient(gradients[i]);
  }
  return normals;
}

}  // namespace rgbps

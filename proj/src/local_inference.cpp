#include "rgbps/local_inference.hpp"

#include "patch_kernel.hpp"
#include "rgbps/parallel.hpp"
#include "rgbps/render.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numeric>

namespace rgbps {

namespace detail {

void gather_gradients(const PixelInversion& inversion, const PatchGrid& patches, std::span<const int> which,
                      Eigen::MatrixXd& out) {
  const int side = patches.side();
  out.resize(2 * side * side, Eigen::Index(which.size()));
  for (std::size_t j = 0; j < which.size(); ++j) {
    const auto& a = patches.anchor(which[j]);
    double* col = out.col(Eigen::Index(j)).data();
    for (int dy = 0; dy < side; ++dy) {
      const Eigen::Index row = Eigen::Index(a.y + dy) * inversion.width + a.x;
      for (int dx = 0; dx < side; ++dx) {
        col[0] = inversion.gradients(0, row + dx);
        col[1] = inversion.gradients(1, row + dx);
        col += 2;
      }
    }
  }
}

double patch_energy(const RgbImage& image, const PatchGrid& patches, int m) {
  const int side = patches.side();
  const auto& a = patches.anchor(m);
  double sum = 0.0;
  for (int dy = 0; dy < side; ++dy) {
    for (int dx = 0; dx < side; ++dx) sum += image(a.x + dx, a.y + dy).squaredNorm();
  }
  return sum;
}

void score_batch(const RgbImage& image, const Eigen::Matrix3d& shading, const PatchGrid& patches,
                 std::span<const int> which, const Eigen::MatrixXd& predicted, std::span<const double> taus,
                 std::span<const double> energies, std::span<double> scores) {
  const int side = patches.side();
  const double* v = image.data().data();
  for (std::size_t j = 0; j < which.size(); ++j) {
    const auto& a = patches.anchor(which[j]);
    const Eigen::Matrix3d m = taus[j] * shading;
    const double* g = predicted.col(Eigen::Index(j)).data();
    double residual = 0.0;
    for (int dy = 0; dy < side; ++dy) {
      const double* row = v + 3 * (Eigen::Index(a.y + dy) * image.width() + a.x);
      for (int dx = 0; dx < side; ++dx, g += 2, row += 3) {
        const double inv = 1.0 / std::sqrt(1.0 + g[0] * g[0] + g[1] * g[1]);
        const double nx = g[0] * inv, ny = g[1] * inv, nz = inv;
        const double r0 = row[0] - (m(0, 0) * nx + m(0, 1) * ny + m(0, 2) * nz);
        const double r1 = row[1] - (m(1, 0) * nx + m(1, 1) * ny + m(1, 2) * nz);
        const double r2 = row[2] - (m(2, 0) * nx + m(2, 1) * ny + m(2, 2) * nz);
        residual += r0 * r0 + r1 * r1 + r2 * r2;
      }
    }
    scores[j] = residual / energies[j];
  }
}

double patch_mean_tau(const PixelInversion& inversion, const PatchGrid& patches, int m) {
  const int side = patches.side();
  const auto& a = patches.anchor(m);
  double sum = 0.0;
  for (int dy = 0; dy < side; ++dy) {
    for (int dx = 0; dx < side; ++dx) sum += inversion.tau[std::size_t(a.y + dy) * inversion.width + a.x + dx];
  }
  return sum / (side * side);
}

bool patch_valid(const PixelInversion& inversion, const PatchGrid& patches, int m) {
  const int side = patches.side();
  const auto& a = patches.anchor(m);
  for (int dy = 0; dy < side; ++dy) {
    for (int dx = 0; dx < side; ++dx) {
      if (!inversion.valid[std::size_t(a.y + dy) * inversion.width + a.x + dx]) return false;
    }
  }
  return true;
}

}  // namespace detail

PixelInversion invert_pixels(const RgbImage& image, const LightingRig& rig, const Eigen::Vector3d& chroma,
                             double eps_tau) {
  if (!chroma.allFinite() || chroma.minCoeff() < 1e-6) {
    throw InputError("invert_pixels: chromaticity components must be >= 1e-6");
  }
  PixelInversion out;
  out.width = image.width();
  out.height = image.height();
  const Eigen::Index n = image.size();
  out.tau.assign(std::size_t(n), 0.0);
  out.normals = Eigen::Matrix3Xd::Zero(3, n);
  out.gradients = Eigen::Matrix2Xd::Zero(2, n);
  out.valid.assign(std::size_t(n), 0);

  const Eigen::Matrix3d unmix = rig.inverse_transpose() * chroma.cwiseInverse().asDiagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!image.valid(i)) continue;
    const Eigen::Vector3d w = unmix * image[i];
    const double tau = w.norm();
    if (!(tau >= eps_tau) || !(w.z() > 1e-6 * tau)) continue;
    out.tau[std::size_t(i)] = tau;
    out.normals.col(i) = w / tau;
    out.gradients.col(i) << w.x() / w.z(), w.y() / w.z();
    out.valid[std::size_t(i)] = 1;
  }
  return out;
}

double rendering_score(const RgbImage& image, const LightingRig& rig, const PatchGrid& patches, int m,
                       const Eigen::Vector3d& albedo, const Eigen::Matrix3Xd& normals) {
  const int side = patches.side();
  if (normals.cols() != side * side) throw InputError("rendering_score: normal count does not match patch");
  const Eigen::Matrix3d shading = albedo.asDiagonal() * rig.matrix().transpose();
  double residual = 0.0;
  double energy = 0.0;
  for (int i = 0; i < side * side; ++i) {
    const auto v = image[patches.pixel(m, i)];
    residual += (v - shading * normals.col(i)).squaredNorm();
    energy += v.squaredNorm();
  }
  if (energy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return residual / energy;
}

std::vector<PatchFit> patch_fit(const RgbImage& image, const LightingRig& rig, const PixelInversion& inversion,
                                const PatchGrid& patches, const BasisMatrix& basis, const Eigen::Vector3d& chroma) {
  if (patches.side() != basis.geometry().patch_side) throw InputError("patch_fit: patch size does not match basis");
  std::vector<PatchFit> fits(std::size_t(patches.size()));
  std::vector<int> which;
  std::vector<double> taus, energies;
  for (int m = 0; m < patches.size(); ++m) {
    if (!detail::patch_valid(inversion, patches, m)) continue;
    const double energy = detail::patch_energy(image, patches, m);
    if (energy == 0.0) continue;
    which.push_back(m);
    taus.push_back(detail::patch_mean_tau(inversion, patches, m));
    energies.push_back(energy);
  }

  Eigen::MatrixXd gradients;
  detail::gather_gradients(inversion, patches, which, gradients);
  const Eigen::MatrixXd coeffs = basis.projector() * gradients;
  const Eigen::MatrixXd predicted = basis.matrix() * coeffs;
  std::vector<double> scores(which.size());
  const Eigen::Matrix3d shading = chroma.asDiagonal() * rig.matrix().transpose();
  detail::score_batch(image, shading, patches, which, predicted, taus, energies, scores);

  for (std::size_t j = 0; j < which.size(); ++j) {
    auto& fit = fits[std::size_t(which[j])];
    fit.valid = true;
    fit.tau = taus[j];
    fit.coeffs = coeffs.col(Eigen::Index(j));
    fit.score = scores[j];
  }
  return fits;
}

LocalDistributions::LocalDistributions(int patches, std::vector<AlbedoCandidate> albedos, int coeffs)
    : patches_(patches), albedos_(std::move(albedos)) {
  const std::size_t slots = std::size_t(patches) * albedos_.size();
  coeffs_ = Eigen::MatrixXd::Zero(coeffs, Eigen::Index(slots));
  scores_.assign(slots, std::numeric_limits<double>::infinity());
  valid_.assign(slots, 0);
}

int LocalDistributions::valid_count(int m) const {
  int n = 0;
  for (int k = 0; k < candidate_count(); ++k) n += valid(m, k);
  return n;
}

void LocalDistributions::set(int m, int k, const Eigen::Ref<const Eigen::VectorXd>& coeffs, double score) {
  const auto s = slot(m, k);
  coeffs_.col(Eigen::Index(s)) = coeffs;
  scores_[s] = score;
  valid_[s] = 1;
}

void LocalDistributions::set_invalid(int m, int k) {
  const auto s = slot(m, k);
  coeffs_.col(Eigen::Index(s)).setZero();
  scores_[s] = std::numeric_limits<double>::infinity();
  valid_[s] = 0;
}

LocalDistributions local_distributions(const RgbImage& image, const LightingRig& rig,
                                       const std::vector<AlbedoCandidate>& albedos, const PatchGrid& patches,
                                       const BasisMatrix& basis, double eps_tau) {
  if (albedos.empty()) throw InputError("local_distributions: albedo set is empty");
  if (patches.side() != basis.geometry().patch_side) {
    throw InputError("local_distributions: patch size does not match basis");
  }
  LocalDistributions dists(patches.size(), albedos, basis.coeffs());

  std::vector<double> energies(std::size_t(patches.size()));
  for (int m = 0; m < patches.size(); ++m) energies[std::size_t(m)] = detail::patch_energy(image, patches, m);

  parallel_for(std::ptrdiff_t(albedos.size()), [&](std::ptrdiff_t kk) {
    const int k = int(kk);
    const auto& albedo = albedos[std::size_t(k)];
    const PixelInversion inversion = invert_pixels(image, rig, albedo.chroma, eps_tau);
    const Eigen::Matrix3d shading = albedo.chroma.asDiagonal() * rig.matrix().transpose();

    constexpr int batch = 512;
    std::vector<int> which;
    std::vector<double> taus, batch_energy, scores;
    Eigen::MatrixXd gradients;
    for (int begin = 0; begin < patches.size(); begin += batch) {
      const int end = std::min(patches.size(), begin + batch);
      which.clear();
      batch_energy.clear();
      for (int m = begin; m < end; ++m) {
        if (energies[std::size_t(m)] > 0.0 && detail::patch_valid(inversion, patches, m)) {
          which.push_back(m);
          batch_energy.push_back(energies[std::size_t(m)]);
        }
      }
      taus.assign(which.size(), albedo.tau);
      scores.assign(which.size(), 0.0);
      detail::gather_gradients(inversion, patches, which, gradients);
      const Eigen::MatrixXd coeffs = basis.projector() * gradients;
      const Eigen::MatrixXd predicted = basis.matrix() * coeffs;
      detail::score_batch(image, shading, patches, which, predicted, taus, batch_energy, scores);
      for (std::size_t j = 0; j < which.size(); ++j) dists.set(which[j], k, coeffs.col(Eigen::Index(j)), scores[j]);
    }
  });
  return dists;
}

int degeneracy_rank(const Eigen::Matrix3Xd& normals) {
  if (normals.cols() < 6) throw InputError("degeneracy_rank: need at least 6 normals");
  Eigen::MatrixXd outer(normals.cols(), 6);
  for (Eigen::Index i = 0; i < normals.cols(); ++i) {
    const Eigen::Vector3d n = normals.col(i);
    outer.row(i) << n.x() * n.x(), n.y() * n.y(), n.z() * n.z(), n.x() * n.y(), n.x() * n.z(), n.y() * n.z();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(outer);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > 1e-8 * s(0);
  return rank;
}

}  // namespace rgbps

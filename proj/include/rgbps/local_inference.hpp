#pragma once

#include "rgbps/albedo_grid.hpp"
#include "rgbps/field.hpp"
#include "rgbps/lighting.hpp"
#include "rgbps/patch_basis.hpp"
#include "rgbps/patch_grid.hpp"

#include <Eigen/Core>

#include <vector>

namespace rgbps {

/// Per-pixel luminance and normal under one hypothesized chromaticity.
struct PixelInversion {
  int width = 0;
  int height = 0;
  std::vector<double> tau;
  Eigen::Matrix3Xd normals;
  Eigen::Matrix2Xd gradients;
  Mask valid;
};

/// Inverts the image formation model at every masked-in pixel for a known
/// chromaticity: w = L^{-T} diag(chroma)^{-1} v, tau = |w|, n = w / |w|.
/// Pixels are invalid when |w| < eps_tau or w_z <= 1e-6 |w| (no camera-facing
/// normal reproduces the observation). Throws InputError if any chroma
/// component is below 1e-6.
PixelInversion invert_pixels(const RgbImage& image, const LightingRig& rig, const Eigen::Vector3d& chroma,
                             double eps_tau = 1e-8);

/// Luminance, shape coefficients and score of one patch under one chromaticity.
struct PatchFit {
  bool valid = false;
  double tau = 0.0;
  Eigen::VectorXd coeffs;
  double score = 0.0;
};

/// Normalized rendering error of a patch:
///   sum_p |v(p) - diag(albedo) L^T n(p)|^2 / sum_p |v(p)|^2
/// without shadow clipping in the prediction. `normals` holds one column per
/// patch pixel in row-major patch order. Returns NaN for an all-black patch.
double rendering_score(const RgbImage& image, const LightingRig& rig, const PatchGrid& patches, int m,
                       const Eigen::Vector3d& albedo, const Eigen::Matrix3Xd& normals);

/// Fits every patch for one chromaticity: tau is the mean pixel luminance,
/// coefficients the least-squares projection of the pixel gradients, and the
/// score is evaluated with the model normals. Patches with any invalid pixel
/// or a zero denominator are returned with valid = false.
std::vector<PatchFit> patch_fit(const RgbImage& image, const LightingRig& rig, const PixelInversion& inversion,
                                const PatchGrid& patches, const BasisMatrix& basis, const Eigen::Vector3d& chroma);

/// K candidate shapes and scores for every patch, one per global albedo.
/// Entry (m, k) is invalid when patch m has an invalid pixel under albedo k.
class LocalDistributions {
 public:
  LocalDistributions() = default;
  LocalDistributions(int patches, std::vector<AlbedoCandidate> albedos, int coeffs);

  int patch_count() const { return patches_; }
  int candidate_count() const { return int(albedos_.size()); }
  int coeff_count() const { return int(coeffs_.rows()); }
  const std::vector<AlbedoCandidate>& albedos() const { return albedos_; }

  bool valid(int m, int k) const { return valid_[slot(m, k)] != 0; }
  double score(int m, int k) const { return scores_[slot(m, k)]; }
  auto coeffs(int m, int k) const { return coeffs_.col(Eigen::Index(slot(m, k))); }
  int valid_count(int m) const;

  void set(int m, int k, const Eigen::Ref<const Eigen::VectorXd>& coeffs, double score);
  void set_invalid(int m, int k);

  /// All coefficient vectors, column m * K + k.
  const Eigen::MatrixXd& coeff_matrix() const { return coeffs_; }

 private:
  std::size_t slot(int m, int k) const { return std::size_t(m) * albedos_.size() + std::size_t(k); }

  int patches_ = 0;
  std::vector<AlbedoCandidate> albedos_;
  Eigen::MatrixXd coeffs_;
  std::vector<double> scores_;
  std::vector<std::uint8_t> valid_;
};

/// Recomputes patch shapes and scores with respect to a fixed albedo set.
/// The luminance used for scoring candidate k is exactly tau_k.
LocalDistributions local_distributions(const RgbImage& image, const LightingRig& rig,
                                       const std::vector<AlbedoCandidate>& albedos, const PatchGrid& patches,
                                       const BasisMatrix& basis, double eps_tau = 1e-8);

/// Numerical rank (singular values > 1e-8 * largest) of the matrix whose rows
/// are the six distinct entries of n n^T for each normal. Requires >= 6 normals.
int degeneracy_rank(const Eigen::Matrix3Xd& normals);

}  // namespace rgbps

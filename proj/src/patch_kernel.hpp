#pragma once

// Batched per-patch kernels shared by the chromaticity sweep and the local
// distribution pass.

#include "rgbps/local_inference.hpp"

#include <span>

namespace rgbps::detail {

/// Concatenated pixel gradients of the listed patches, one column per patch.
void gather_gradients(const PixelInversion& inversion, const PatchGrid& patches, std::span<const int> which,
                      Eigen::MatrixXd& out);

/// Sum of |v(p)|^2 over patch m.
double patch_energy(const RgbImage& image, const PatchGrid& patches, int m);

/// Normalized rendering error of each listed patch, given the predicted
/// gradients (one column per patch), the chromaticity shading matrix
/// diag(chroma) L^T and a per-patch luminance.
void score_batch(const RgbImage& image, const Eigen::Matrix3d& shading, const PatchGrid& patches,
                 std::span<const int> which, const Eigen::MatrixXd& predicted, std::span<const double> taus,
                 std::span<const double> energies, std::span<double> scores);

/// Mean pixel luminance over patch m.
double patch_mean_tau(const PixelInversion& inversion, const PatchGrid& patches, int m);

/// True when every pixel of patch m has a valid inversion.
bool patch_valid(const PixelInversion& inversion, const PatchGrid& patches, int m);

}  // namespace rgbps::detail

#pragma once

#include "rgbps/albedo_grid.hpp"
#include "rgbps/local_inference.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace rgbps {

/// Soft vote H[l, c] over the discretized albedo space.
class AlbedoHistogram {
 public:
  AlbedoHistogram() = default;
  explicit AlbedoHistogram(const AlbedoGrid& grid);

  const AlbedoGrid& grid() const { return grid_; }
  double at(int lum, int chroma) const { return values_(lum, chroma); }
  double& at(int lum, int chroma) { return values_(lum, chroma); }
  /// n_lum x C matrix.
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

 private:
  AlbedoGrid grid_;
  Eigen::MatrixXd values_;
};

/// Adds each valid fit's vote max(0, h_max - s) to the luminance bin of its
/// patch-mean tau in chromaticity column `chroma_index`.
void accumulate_histogram(AlbedoHistogram& histogram, int chroma_index, const std::vector<PatchFit>& fits,
                          double h_max);

/// Sweeps every grid chromaticity, fits all patches and accumulates the
/// histogram. Patches whose score provably exceeds h_max are skipped before
/// the polynomial fit, which leaves the histogram unchanged. Chromaticities
/// are processed in parallel, each owning its histogram column.
AlbedoHistogram build_histogram(const RgbImage& image, const LightingRig& rig, const PatchGrid& patches,
                                const BasisMatrix& basis, const AlbedoGrid& grid, double h_max,
                                double eps_tau = 1e-8);

struct HistogramPeak {
  int lum = 0;
  int elev = 0;
  int azim = 0;
  double value = 0.0;
};

struct GlobalAlbedoSet {
  std::vector<AlbedoCandidate> albedos;
  std::vector<HistogramPeak> peaks;
  /// Set when fewer than K peaks were found.
  std::string warning;
};

/// Non-maxima suppression over 3x3x3 neighborhoods in (lum, elev, azim) index
/// space (no wrap-around), then the K highest peaks. Within a plateau of equal
/// values only the lowest-index cell survives; ties between peaks sort by
/// index. Throws InputError when the histogram has no positive entry.
GlobalAlbedoSet select_albedo_set(const AlbedoHistogram& histogram, int K);

}  // namespace rgbps

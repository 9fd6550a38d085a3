#pragma once

#include "rgbps/field.hpp"

#include <Eigen/Core>

#include <vector>

namespace rgbps {

struct PatchAnchor {
  int x = 0;
  int y = 0;
};

/// Dense, fully overlapping (stride 1) square windows whose pixels are all
/// masked-in. Patches are ordered row-major by their top-left anchor.
class PatchGrid {
 public:
  PatchGrid() = default;
  PatchGrid(const Mask& mask, int width, int height, int patch_side);

  template <int C, class T>
  static PatchGrid from_field(const Field<C, T>& field, int patch_side) {
    return PatchGrid(field.mask(), field.width(), field.height(), patch_side);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int side() const { return side_; }
  int size() const { return int(anchors_.size()); }
  bool empty() const { return anchors_.empty(); }

  const std::vector<PatchAnchor>& anchors() const { return anchors_; }
  const PatchAnchor& anchor(int m) const { return anchors_[std::size_t(m)]; }

  /// Index of the patch anchored at (x, y), or -1.
  int at(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return -1;
    return lookup_[std::size_t(y) * width_ + x];
  }

  /// Image index of the i-th pixel (row-major within the patch) of patch m.
  Eigen::Index pixel(int m, int i) const {
    const auto& a = anchors_[std::size_t(m)];
    return Eigen::Index(a.y + i / side_) * width_ + a.x + i % side_;
  }

  /// Pixels covered by at least one patch.
  Mask coverage() const;

 private:
  int width_ = 0;
  int height_ = 0;
  int side_ = 0;
  std::vector<PatchAnchor> anchors_;
  std::vector<int> lookup_;
};

}  // namespace rgbps

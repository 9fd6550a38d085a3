#include "rgbps/patch_grid.hpp"

namespace rgbps {

PatchGrid::PatchGrid(const Mask& mask, int width, int height, int patch_side)
    : width_(width), height_(height), side_(patch_side) {
  if (width <= 0 || height <= 0) throw InputError("patch grid: image dimensions must be positive");
  if (mask.size() != std::size_t(width) * height) throw InputError("patch grid: mask size mismatch");
  if (patch_side < 1) throw InputError("patch grid: patch side must be >= 1");

  lookup_.assign(mask.size(), -1);
  if (patch_side > width || patch_side > height) return;

  // Count masked-out pixels in every window with separable running sums.
  const int ax = width - patch_side + 1;
  const int ay = height - patch_side + 1;
  std::vector<int> rows(std::size_t(height) * ax, 0);
  for (int y = 0; y < height; ++y) {
    int run = 0;
    for (int x = 0; x < width; ++x) {
      run += mask[std::size_t(y) * width + x] == 0;
      if (x >= patch_side) run -= mask[std::size_t(y) * width + x - patch_side] == 0;
      if (x >= patch_side - 1) rows[std::size_t(y) * ax + x - patch_side + 1] = run;
    }
  }
  for (int y = 0; y < ay; ++y) {
    for (int x = 0; x < ax; ++x) {
      int holes = 0;
      for (int dy = 0; dy < patch_side; ++dy) holes += rows[std::size_t(y + dy) * ax + x];
      if (holes == 0) {
        lookup_[std::size_t(y) * width + x] = int(anchors_.size());
        anchors_.push_back({x, y});
      }
    }
  }
}

Mask PatchGrid::coverage() const {
  Mask covered(std::size_t(width_) * height_, 0);
  for (const auto& a : anchors_) {
    for (int dy = 0; dy < side_; ++dy) {
      for (int dx = 0; dx < side_; ++dx) covered[std::size_t(a.y + dy) * width_ + a.x + dx] = 1;
    }
  }
  return covered;
}

}  // namespace rgbps

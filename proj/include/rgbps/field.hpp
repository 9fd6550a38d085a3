#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rgbps {

/// Raised for malformed inputs: bad dimensions, files, flags or parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Row-major per-pixel storage of a fixed number of channels plus a validity
/// mask. The tag parameter keeps images, normal maps and albedo maps distinct
/// types even though they share a layout. Pixel (x, y) lives in column
/// `y * width + x` of the channel matrix.
template <int Channels, class Tag>
class Field {
 public:
  using Pixel = Eigen::Matrix<double, Channels, 1>;
  using Storage = Eigen::Matrix<double, Channels, Eigen::Dynamic>;

  Field() = default;

  Field(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw InputError("field dimensions must be positive, got " + std::to_string(width) + "x" +
                       std::to_string(height));
    }
    data_ = Storage::Zero(Channels, Eigen::Index(width) * height);
    mask_.assign(std::size_t(width) * height, 1);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  Eigen::Index size() const { return Eigen::Index(width_) * height_; }
  bool empty() const { return size() == 0; }

  Eigen::Index index(int x, int y) const { return Eigen::Index(y) * width_ + x; }

  auto operator[](Eigen::Index i) { return data_.col(i); }
  auto operator[](Eigen::Index i) const { return data_.col(i); }
  auto operator()(int x, int y) { return data_.col(index(x, y)); }
  auto operator()(int x, int y) const { return data_.col(index(x, y)); }

  Storage& data() { return data_; }
  const Storage& data() const { return data_; }

  bool valid(Eigen::Index i) const { return mask_[std::size_t(i)] != 0; }
  bool valid(int x, int y) const { return valid(index(x, y)); }
  void set_valid(Eigen::Index i, bool v) { mask_[std::size_t(i)] = v ? 1 : 0; }

  const std::vector<std::uint8_t>& mask() const { return mask_; }
  void set_mask(std::vector<std::uint8_t> mask) {
    if (mask.size() != std::size_t(size())) throw InputError("mask size does not match field");
    mask_ = std::move(mask);
  }

  Eigen::Index valid_count() const {
    Eigen::Index n = 0;
    for (auto m : mask_) n += m != 0;
    return n;
  }

  template <int C2, class T2>
  bool same_shape(const Field<C2, T2>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

 private:
  int width_ = 0;
  int height_ = 0;
  Storage data_;
  std::vector<std::uint8_t> mask_;
};

struct RgbTag;
struct NormalTag;
struct AlbedoTag;
struct GradientTag;
struct ScalarTag;

/// Linear RGB intensities v(p).
using RgbImage = Field<3, RgbTag>;
/// Unit surface normals, camera at +z.
using NormalField = Field<3, NormalTag>;
/// Per-pixel RGB albedo.
using AlbedoMap = Field<3, AlbedoTag>;
/// Depth gradients [dz/dx, dz/dy].
using GradientField = Field<2, GradientTag>;
/// Single-channel maps: depth, angular error, outlier fraction.
using ScalarMap = Field<1, ScalarTag>;

using Mask = std::vector<std::uint8_t>;

/// Throws InputError if any masked-in value is non-finite.
template <int C, class T>
void require_finite(const Field<C, T>& f, const char* what) {
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f.valid(i) && !f[i].allFinite()) {
      throw InputError(std::string(what) + ": non-finite value at pixel " + std::to_string(i % f.width()) +
                       "," + std::to_string(i / f.width()));
    }
  }
}

/// Validates an observed image: finite values at masked-in pixels.
void validate_image(const RgbImage& image);
/// Validates an albedo map: finite, nonnegative values.
void validate_albedo(const AlbedoMap& albedo);
/// Validates unit length (1e-6) and positive z at masked-in pixels.
void validate_normals(const NormalField& normals);

}  // namespace rgbps

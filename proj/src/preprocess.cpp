#include "rgbps/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rgbps {

namespace {

constexpr int kBlurRadius = 3;

std::array<double, 2 * kBlurRadius + 1> gaussian_taps() {
  std::array<double, 2 * kBlurRadius + 1> taps{};
  double sum = 0.0;
  for (int d = -kBlurRadius; d <= kBlurRadius; ++d) {
    taps[std::size_t(d + kBlurRadius)] = std::exp(-0.5 * d * d);
    sum += taps[std::size_t(d + kBlurRadius)];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

// Separable blur of a w x h plane (row-major), clamping at the borders.
std::vector<double> blur(const std::vector<double>& plane, int w, int h) {
  static const auto taps = gaussian_taps();
  std::vector<double> tmp(plane.size()), out(plane.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int d = -kBlurRadius; d <= kBlurRadius; ++d) {
        acc += taps[std::size_t(d + kBlurRadius)] * plane[std::size_t(y) * w + std::clamp(x + d, 0, w - 1)];
      }
      tmp[std::size_t(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int d = -kBlurRadius; d <= kBlurRadius; ++d) {
        acc += taps[std::size_t(d + kBlurRadius)] * tmp[std::size_t(std::clamp(y + d, 0, h - 1)) * w + x];
      }
      out[std::size_t(y) * w + x] = acc;
    }
  }
  return out;
}

// Channel (0 R, 1 G, 2 B) of each site of the 2x2 block, row by row.
std::array<int, 4> block_channels(BayerPattern pattern) {
  switch (pattern) {
    case BayerPattern::RGGB: return {0, 1, 1, 2};
    case BayerPattern::BGGR: return {2, 1, 1, 0};
    case BayerPattern::GRBG: return {1, 0, 2, 1};
    case BayerPattern::GBRG: return {1, 2, 0, 1};
  }
  throw InputError("unknown Bayer pattern");
}

}  // namespace

BayerPattern parse_bayer_pattern(const std::string& name) {
  if (name == "RGGB") return BayerPattern::RGGB;
  if (name == "BGGR") return BayerPattern::BGGR;
  if (name == "GRBG") return BayerPattern::GRBG;
  if (name == "GBRG") return BayerPattern::GBRG;
  throw InputError("unknown Bayer pattern '" + name + "' (expected RGGB, BGGR, GRBG or GBRG)");
}

PreprocessResult preprocess_bayer(const ScalarMap& mosaic, BayerPattern pattern, double mask_threshold) {
  const int w = mosaic.width() / 2, h = mosaic.height() / 2;
  if (w < 1 || h < 1) throw InputError("Bayer mosaic must be at least 2x2");
  for (Eigen::Index i = 0; i < mosaic.size(); ++i) {
    if (!std::isfinite(mosaic[i](0))) throw InputError("Bayer mosaic contains non-finite values");
  }

  const auto channels = block_channels(pattern);
  RgbImage rgb(w, h);
  rgb.data().setZero();
  for (int site = 0; site < 4; ++site) {
    const int sx = site % 2, sy = site / 2;
    std::vector<double> plane(std::size_t(w) * h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) plane[std::size_t(y) * w + x] = mosaic(2 * x + sx, 2 * y + sy)(0);
    }
    plane = blur(plane, w, h);
    const int c = channels[std::size_t(site)];
    const double weight = c == 1 ? 0.5 : 1.0;
    for (Eigen::Index i = 0; i < rgb.size(); ++i) rgb[i](c) += weight * plane[std::size_t(i)];
  }
  return preprocess_rgb(rgb, mask_threshold);
}

PreprocessResult preprocess_rgb(const RgbImage& image, double mask_threshold) {
  validate_image(image);
  double max_luma = 0.0;
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    if (image.valid(i)) max_luma = std::max(max_luma, image[i].mean());
  }
  PreprocessResult out{image, Eigen::Vector3d::Zero()};
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const bool keep = image.valid(i) && max_luma > 0.0 && image[i].mean() > mask_threshold * max_luma;
    out.image.set_valid(i, keep);
    if (!keep) continue;
    out.gains += image[i];
    ++count;
  }
  if (count == 0) throw InputError("foreground mask is empty");
  out.gains /= double(count);
  if ((out.gains.array() <= 0.0).any()) throw InputError("a channel has non-positive mean over the mask");
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    out.image[i] = out.image[i].cwiseQuotient(out.gains);
  }
  return out;
}

}  // namespace rgbps

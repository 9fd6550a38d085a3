#pragma once

#include "rgbps/field.hpp"
#include "rgbps/lighting.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rgbps {

/// Raw PFM contents. `data` is interleaved and stored top row first; the file
/// itself stores rows bottom to top as the format prescribes.
struct PfmImage {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<float> data;
};

/// Reads "PF" (3-channel) or "Pf" (1-channel) files of either endianness.
/// Throws InputError for missing or malformed files.
PfmImage read_pfm(const std::filesystem::path& path);

/// Writes little-endian PFM (scale -1.0), rows bottom to top.
void write_pfm(const std::filesystem::path& path, const PfmImage& image);

/// Masked-out pixels are written as zeros.
void write_pfm(const std::filesystem::path& path, const RgbImage& image);
void write_pfm(const std::filesystem::path& path, const NormalField& normals);
void write_pfm(const std::filesystem::path& path, const AlbedoMap& albedo);
/// Masked-out pixels are written as NaN.
void write_pfm(const std::filesystem::path& path, const ScalarMap& map);

/// All pixels valid.
RgbImage read_rgb_pfm(const std::filesystem::path& path);
AlbedoMap read_albedo_pfm(const std::filesystem::path& path);
/// Pixels with |n| < 0.5 (e.g. written zeros) are masked out; the rest are
/// renormalized to unit length.
NormalField read_normals_pfm(const std::filesystem::path& path);
/// Non-finite pixels are masked out.
ScalarMap read_scalar_pfm(const std::filesystem::path& path);

/// Nine whitespace-separated numbers, column-major: l_R, then l_G, then l_B.
LightingRig read_rig(const std::filesystem::path& path);
void write_rig(const std::filesystem::path& path, const LightingRig& rig);

/// 8-bit PNG, 1 (gray) or 3 (RGB) channels, rows top first.
void write_png(const std::filesystem::path& path, int width, int height, int channels,
               const std::vector<std::uint8_t>& pixels);

/// Normal map visualization: channel = (n + 1) / 2 scaled to 8 bits.
void write_normals_png(const std::filesystem::path& path, const NormalField& normals);
/// Scalar map in [0, 1] scaled to 8-bit gray; masked-out pixels are black.
void write_gray_png(const std::filesystem::path& path, const ScalarMap& map);

/// Shortest representation that reads back to the same double.
std::string format_double(double value);

}  // namespace rgbps

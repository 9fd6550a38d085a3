#include "rgbps/io.hpp"

#include <png.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace rgbps {

namespace {

std::string read_token(std::istream& in) {
  std::string token;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (!std::isspace(static_cast<unsigned char>(c))) {
      token.push_back(c);
      break;
    }
  }
  while (in.get(c)) {
    if (std::isspace(static_cast<unsigned char>(c))) break;
    token.push_back(c);
  }
  return token;
}

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

template <class F>
PfmImage to_pfm(const F& field, int channels, float masked_value) {
  PfmImage out{field.width(), field.height(), channels, {}};
  out.data.resize(std::size_t(field.size()) * channels);
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    for (int c = 0; c < channels; ++c) {
      out.data[std::size_t(i) * channels + c] = field.valid(i) ? float(field[i](c)) : masked_value;
    }
  }
  return out;
}

template <class F>
F from_pfm(const PfmImage& pfm, int channels, const std::filesystem::path& path) {
  if (pfm.channels != channels) {
    throw InputError(path.string() + ": expected " + std::to_string(channels) + "-channel PFM");
  }
  F field(pfm.width, pfm.height);
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    for (int c = 0; c < channels; ++c) field[i](c) = pfm.data[std::size_t(i) * channels + c];
  }
  return field;
}

}  // namespace

PfmImage read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  const std::string magic = read_token(in);
  PfmImage img;
  if (magic == "PF") {
    img.channels = 3;
  } else if (magic == "Pf") {
    img.channels = 1;
  } else {
    throw InputError(path.string() + ": not a PFM file");
  }
  double scale = 0.0;
  try {
    img.width = std::stoi(read_token(in));
    img.height = std::stoi(read_token(in));
    scale = std::stod(read_token(in));
  } catch (const std::exception&) {
    throw InputError(path.string() + ": malformed PFM header");
  }
  if (img.width <= 0 || img.height <= 0 || scale == 0.0) throw InputError(path.string() + ": invalid PFM header");
  const bool file_little = scale < 0.0;
  const bool host_little = std::endian::native == std::endian::little;

  const std::size_t row = std::size_t(img.width) * img.channels;
  img.data.resize(row * img.height);
  std::vector<std::uint32_t> buffer(row);
  for (int y = img.height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(buffer.data()), std::streamsize(row * sizeof(float)));
    if (!in) throw InputError(path.string() + ": truncated PFM data");
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t bits = buffer[i];
      if (file_little != host_little) bits = byteswap32(bits);
      img.data[std::size_t(y) * row + i] = std::bit_cast<float>(bits);
    }
  }
  return img;
}

void write_pfm(const std::filesystem::path& path, const PfmImage& img) {
  if (img.channels != 1 && img.channels != 3) throw InputError("PFM supports 1 or 3 channels");
  if (img.data.size() != std::size_t(img.width) * img.height * img.channels) throw InputError("PFM data size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << (img.channels == 3 ? "PF" : "Pf") << "\n" << img.width << " " << img.height << "\n-1.0\n";
  const std::size_t row = std::size_t(img.width) * img.channels;
  std::vector<std::uint32_t> buffer(row);
  for (int y = img.height - 1; y >= 0; --y) {
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t bits = std::bit_cast<std::uint32_t>(img.data[std::size_t(y) * row + i]);
      if constexpr (std::endian::native != std::endian::little) bits = byteswap32(bits);
      buffer[i] = bits;
    }
    out.write(reinterpret_cast<const char*>(buffer.data()), std::streamsize(row * sizeof(float)));
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_pfm(const std::filesystem::path& path, const RgbImage& image) { write_pfm(path, to_pfm(image, 3, 0.0f)); }
void write_pfm(const std::filesystem::path& path, const NormalField& normals) {
  write_pfm(path, to_pfm(normals, 3, 0.0f));
}
void write_pfm(const std::filesystem::path& path, const AlbedoMap& albedo) { write_pfm(path, to_pfm(albedo, 3, 0.0f)); }
void write_pfm(const std::filesystem::path& path, const ScalarMap& map) {
  write_pfm(path, to_pfm(map, 1, std::numeric_limits<float>::quiet_NaN()));
}

RgbImage read_rgb_pfm(const std::filesystem::path& path) { return from_pfm<RgbImage>(read_pfm(path), 3, path); }

AlbedoMap read_albedo_pfm(const std::filesystem::path& path) { return from_pfm<AlbedoMap>(read_pfm(path), 3, path); }

NormalField read_normals_pfm(const std::filesystem::path& path) {
  auto normals = from_pfm<NormalField>(read_pfm(path), 3, path);
  for (Eigen::Index i = 0; i < normals.size(); ++i) {
    const double len = normals[i].norm();
    if (std::isfinite(len) && len >= 0.5) {
      normals[i] /= len;
    } else {
      normals[i].setZero();
      normals.set_valid(i, false);
    }
  }
  return normals;
}

ScalarMap read_scalar_pfm(const std::filesystem::path& path) {
  auto map = from_pfm<ScalarMap>(read_pfm(path), 1, path);
  for (Eigen::Index i = 0; i < map.size(); ++i) {
    if (!std::isfinite(map[i](0))) {
      map[i](0) = 0.0;
      map.set_valid(i, false);
    }
  }
  return map;
}

LightingRig read_rig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open rig file " + path.string());
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw InputError("");
    } catch (const std::exception&) {
      throw InputError(path.string() + ": invalid number '" + token + "'");
    }
  }
  if (values.size() != 9) {
    throw InputError(path.string() + ": expected 9 numbers, found " + std::to_string(values.size()));
  }
  Eigen::Matrix3d L;
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 3; ++r) L(r, c) = values[std::size_t(3 * c + r)];
  }
  return LightingRig(L);
}

void write_rig(const std::filesystem::path& path, const LightingRig& rig) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (int c = 0; c < 3; ++c) {
    out << format_double(rig.matrix()(0, c)) << " " << format_double(rig.matrix()(1, c)) << " "
        << format_double(rig.matrix()(2, c)) << "\n";
  }
}

void write_png(const std::filesystem::path& path, int width, int height, int channels,
               const std::vector<std::uint8_t>& pixels) {
  if (channels != 1 && channels != 3) throw InputError("PNG supports 1 or 3 channels");
  if (pixels.size() != std::size_t(width) * height * channels) throw InputError("PNG pixel buffer size mismatch");
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw std::runtime_error("cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, pixels.data() + std::size_t(y) * width * channels);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_normals_png(const std::filesystem::path& path, const NormalField& normals) {
  std::vector<std::uint8_t> px(std::size_t(normals.size()) * 3, 0);
  for (Eigen::Index i = 0; i < normals.size(); ++i) {
    if (!normals.valid(i)) continue;
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp((normals[i](c) + 1.0) * 0.5, 0.0, 1.0);
      px[std::size_t(i) * 3 + c] = std::uint8_t(std::lround(v * 255.0));
    }
  }
  write_png(path, normals.width(), normals.height(), 3, px);
}

void write_gray_png(const std::filesystem::path& path, const ScalarMap& map) {
  std::vector<std::uint8_t> px(std::size_t(map.size()), 0);
  for (Eigen::Index i = 0; i < map.size(); ++i) {
    if (map.valid(i)) px[std::size_t(i)] = std::uint8_t(std::lround(std::clamp(map[i](0), 0.0, 1.0) * 255.0));
  }
  write_png(path, map.width(), map.height(), 1, px);
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace rgbps

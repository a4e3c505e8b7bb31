#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "cafewall/field.hpp"

namespace cafewall {

using Rgb = std::array<std::uint8_t, 3>;

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;  // RGBRGB..., row-major

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h, Rgb fill = {0, 0, 0}) : width(w), height(h), data(w * h * 3) {
    for (std::size_t i = 0; i < w * h; ++i)
      for (int c = 0; c < 3; ++c) data[i * 3 + c] = fill[c];
  }

  Rgb at(std::size_t x, std::size_t y) const {
    const std::size_t i = (y * width + x) * 3;
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set(std::size_t x, std::size_t y, Rgb c) {
    const std::size_t i = (y * width + x) * 3;
    data[i] = c[0];
    data[i + 1] = c[1];
    data[i + 2] = c[2];
  }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Luminance in [0,1] to 8 bits: round(v * 255), clamped.
inline std::uint8_t to_byte(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

namespace detail {

inline void write_png(const std::filesystem::path& path, std::size_t w, std::size_t h, png_uint_32 format,
                      const std::uint8_t* pixels) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = format;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, pixels, 0, nullptr))
    throw std::runtime_error("png write failed for " + path.string() + ": " + img.message);
}

inline std::vector<std::uint8_t> read_png(const std::filesystem::path& path, png_uint_32 format,
                                          std::size_t& w, std::size_t& h) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str()))
    throw std::runtime_error("png read failed for " + path.string() + ": " + img.message);
  img.format = format;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr))
    throw std::runtime_error("png decode failed for " + path.string() + ": " + img.message);
  w = img.width;
  h = img.height;
  return buf;
}

}  // namespace detail

/// 8-bit grayscale export of a luminance field.
inline void write_png(const std::filesystem::path& path, const ScalarField& lum) {
  std::vector<std::uint8_t> px(lum.size());
  auto v = lum.values();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = to_byte(v[i]);
  detail::write_png(path, lum.width(), lum.height(), PNG_FORMAT_GRAY, px.data());
}

/// Foreground white on black.
inline void write_png(const std::filesystem::path& path, const BinaryImage& bin) {
  std::vector<std::uint8_t> px(bin.width() * bin.height());
  auto bits = bin.bits();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = bits[i] ? 255 : 0;
  detail::write_png(path, bin.width(), bin.height(), PNG_FORMAT_GRAY, px.data());
}

inline void write_png(const std::filesystem::path& path, const RgbImage& rgb) {
  detail::write_png(path, rgb.width, rgb.height, PNG_FORMAT_RGB, rgb.data.data());
}

/// Reads any PNG as 8-bit gray, scaled back to [0,1].
inline ScalarField read_png_gray(const std::filesystem::path& path) {
  std::size_t w = 0, h = 0;
  const auto buf = detail::read_png(path, PNG_FORMAT_GRAY, w, h);
  ScalarField f(w, h);
  auto v = f.values();
  for (std::size_t i = 0; i < buf.size(); ++i) v[i] = buf[i] / 255.0;
  return f;
}

inline RgbImage read_png_rgb(const std::filesystem::path& path) {
  std::size_t w = 0, h = 0;
  RgbImage img;
  img.data = detail::read_png(path, PNG_FORMAT_RGB, w, h);
  img.width = w;
  img.height = h;
  return img;
}

}  // namespace cafewall

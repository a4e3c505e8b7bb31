#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cafewall {

/// Row-major 2-D field of doubles. Holds stimulus luminance in [0,1] or a
/// signed filter response.
class ScalarField {
public:
  ScalarField() = default;
  ScalarField(std::size_t width, std::size_t height, double fill = 0.0)
      : width_(width), height_(height), data_(width * height, fill) {}
  ScalarField(std::size_t width, std::size_t height, std::vector<double> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != width_ * height_)
      throw std::invalid_argument("ScalarField: data length != width*height");
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  double operator()(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

  std::span<double> row(std::size_t y) { return {data_.data() + y * width_, width_}; }
  std::span<const double> row(std::size_t y) const { return {data_.data() + y * width_, width_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

/// Foreground mask; 1 = foreground.
class BinaryImage {
public:
  BinaryImage() = default;
  BinaryImage(std::size_t width, std::size_t height)
      : width_(width), height_(height), bits_(width * height, 0) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  bool empty() const noexcept { return bits_.empty(); }

  bool operator()(std::size_t x, std::size_t y) const { return bits_[y * width_ + x] != 0; }
  void set(std::size_t x, std::size_t y, bool on = true) { bits_[y * width_ + x] = on ? 1 : 0; }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Left-right flip.
inline ScalarField mirror(const ScalarField& in) {
  ScalarField out(in.width(), in.height());
  const std::size_t w = in.width();
  for (std::size_t y = 0; y < in.height(); ++y)
    for (std::size_t x = 0; x < w; ++x) out(x, y) = in(w - 1 - x, y);
  return out;
}

inline BinaryImage mirror(const BinaryImage& in) {
  BinaryImage out(in.width(), in.height());
  const std::size_t w = in.width();
  for (std::size_t y = 0; y < in.height(); ++y)
    for (std::size_t x = 0; x < w; ++x) out.set(x, y, in(w - 1 - x, y));
  return out;
}

}  // namespace cafewall

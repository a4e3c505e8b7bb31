#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cafewall/field.hpp"
#include "cafewall/parallel.hpp"
#include "cafewall/stimulus.hpp"

namespace cafewall {

/// Balanced centre-surround filter parameters. Scales are in pixels.
struct DoGParams {
  double sigma_c = 8.0;
  double surround_ratio = 2.0;  ///< sigma_surround / sigma_c
  double window_ratio = 8.0;    ///< window = window_ratio * sigma_c + 1

  friend bool operator==(const DoGParams&, const DoGParams&) = default;
};

inline void validate(const DoGParams& p) {
  if (!(p.sigma_c > 0.0)) throw std::domain_error("DoGParams.sigma_c: must be > 0");
  if (!(p.surround_ratio > 1.0)) throw std::domain_error("DoGParams.surround_ratio: must be > 1");
  if (!(p.window_ratio >= 2.0)) throw std::domain_error("DoGParams.window_ratio: must be >= 2");
}

/// Odd window side h*sigma_c + 1. A non-integral h*sigma_c is rounded and,
/// when the result would be even, bumped to the next odd size.
inline int window_size(const DoGParams& p) {
  auto n = static_cast<int>(std::lround(p.window_ratio * p.sigma_c));
  if (n % 2 != 0) ++n;
  return n + 1;
}

/// Square kernel addressed by offsets from its centre.
struct Kernel2D {
  int size = 0;
  std::vector<double> weights;  // row-major, size*size

  int radius() const noexcept { return size / 2; }
  double at(int dx, int dy) const { return weights[(dy + radius()) * size + (dx + radius())]; }
  double sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

namespace detail {

inline void require_odd(int size) {
  if (size < 1 || size % 2 == 0)
    throw std::invalid_argument("kernel size must be a positive odd integer, got " + std::to_string(size));
}

}  // namespace detail

/// Sampled 1-D Gaussian, renormalized to unit sum.
inline std::vector<double> gaussian_kernel_1d(double sigma, int size) {
  detail::require_odd(size);
  if (!(sigma > 0.0)) throw std::domain_error("gaussian sigma must be > 0");
  const int r = size / 2;
  std::vector<double> k(size);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + r];
  }
  for (double& w : k) w /= sum;
  return k;
}

/// Sampled 2-D Gaussian on the integer grid, renormalized to unit sum.
inline Kernel2D gaussian_kernel(double sigma, int size) {
  detail::require_odd(size);
  if (!(sigma > 0.0)) throw std::domain_error("gaussian sigma must be > 0");
  Kernel2D k{size, std::vector<double>(static_cast<std::size_t>(size) * size)};
  const int r = size / 2;
  const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
  double sum = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      const double w = norm * std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
      k.weights[(y + r) * size + (x + r)] = w;
      sum += w;
    }
  for (double& w : k.weights) w /= sum;
  return k;
}

struct DoGKernel {
  int size = 0;
  Kernel2D kernel;
  DoGParams params;

  double at(int dx, int dy) const { return kernel.at(dx, dy); }
  double sum() const { return kernel.sum(); }
};

/// Centre Gaussian minus surround Gaussian over a shared window; both unit
/// sum, so the difference is balanced.
inline DoGKernel dog_kernel(const DoGParams& p) {
  validate(p);
  const int size = window_size(p);
  Kernel2D c = gaussian_kernel(p.sigma_c, size);
  const Kernel2D s = gaussian_kernel(p.surround_ratio * p.sigma_c, size);
  for (std::size_t i = 0; i < c.weights.size(); ++i) c.weights[i] -= s.weights[i];
  return DoGKernel{size, std::move(c), p};
}

/// Sampled Laplacian of Gaussian, mean-subtracted to zero sum. Negative at
/// the centre. Only used to cross-check the DoG approximation.
inline Kernel2D log_kernel_reference(double sigma, int size) {
  detail::require_odd(size);
  if (!(sigma > 0.0)) throw std::domain_error("log sigma must be > 0");
  Kernel2D k{size, std::vector<double>(static_cast<std::size_t>(size) * size)};
  const int r = size / 2;
  const double s2 = sigma * sigma;
  const double norm = 1.0 / (2.0 * std::numbers::pi * s2 * s2 * s2);
  double sum = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) {
      const double rr = x * x + y * y;
      const double w = norm * (rr - 2.0 * s2) * std::exp(-rr / (2.0 * s2));
      k.weights[(y + r) * size + (x + r)] = w;
      sum += w;
    }
  const double mean = sum / static_cast<double>(k.weights.size());
  for (double& w : k.weights) w -= mean;
  return k;
}

namespace detail {

// Separable convolution with a symmetric odd 1-D kernel, replicate border.
inline ScalarField separable_blur(const ScalarField& in, const std::vector<double>& k) {
  const int w = static_cast<int>(in.width());
  const int h = static_cast<int>(in.height());
  const int r = static_cast<int>(k.size()) / 2;

  ScalarField tmp(in.width(), in.height());
  std::vector<double> pad(static_cast<std::size_t>(w + 2 * r));
  for (int y = 0; y < h; ++y) {
    auto src = in.row(y);
    for (int i = 0; i < w + 2 * r; ++i) pad[i] = src[std::clamp(i - r, 0, w - 1)];
    auto dst = tmp.row(y);
    for (int x = 0; x < w; ++x) {
      const double* p = pad.data() + x + r;
      double acc = k[r] * p[0];
      for (int i = 1; i <= r; ++i) acc += k[r + i] * (p[-i] + p[i]);
      dst[x] = acc;
    }
  }

  ScalarField out(in.width(), in.height());
  for (int y = 0; y < h; ++y) {
    auto dst = out.row(y);
    {
      auto mid = tmp.row(y);
      for (int x = 0; x < w; ++x) dst[x] = k[r] * mid[x];
    }
    for (int i = 1; i <= r; ++i) {
      auto up = tmp.row(std::clamp(y - i, 0, h - 1));
      auto dn = tmp.row(std::clamp(y + i, 0, h - 1));
      const double ki = k[r + i];
      for (int x = 0; x < w; ++x) dst[x] += ki * (up[x] + dn[x]);
    }
  }
  return out;
}

}  // namespace detail

/// Signed DoG response, same size as the input: (G_c * I) - (G_s * I) with
/// both Gaussians applied as two 1-D passes and replicated borders.
inline ScalarField convolve(const ScalarField& image, const DoGParams& p) {
  validate(p);
  if (image.empty()) throw std::invalid_argument("convolve: empty image");
  const int size = window_size(p);
  ScalarField centre = detail::separable_blur(image, gaussian_kernel_1d(p.sigma_c, size));
  const ScalarField surround =
      detail::separable_blur(image, gaussian_kernel_1d(p.surround_ratio * p.sigma_c, size));
  auto c = centre.values();
  auto s = surround.values();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= s[i];
  return centre;
}

/// Magnitudes at or below this are treated as exact zeros of the response.
/// A balanced filter over a flat region is analytically zero but leaves
/// rounding residue of order 1e-16.
inline constexpr double kResponseEpsilon = 1e-10;

/// Foreground where the response is positive (ON-centre activity).
inline BinaryImage binarize(const ScalarField& response, double epsilon = kResponseEpsilon) {
  BinaryImage out(response.width(), response.height());
  for (std::size_t y = 0; y < response.height(); ++y) {
    auto row = response.row(y);
    for (std::size_t x = 0; x < response.width(); ++x)
      if (row[x] > epsilon) out.set(x, y);
  }
  return out;
}

struct EdgeMapEntry {
  double sigma_c = 0.0;
  ScalarField response;
  BinaryImage binary;
};

struct EdgeMapStack {
  std::vector<EdgeMapEntry> entries;  ///< ascending sigma_c
  StimulusSpec source_spec;
};

class ScaleTooLargeError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Scales 0.5M .. 3.5M in steps of 0.5M for base mortar width M.
inline std::vector<double> default_scales(double mortar = 8.0) {
  std::vector<double> s;
  for (int i = 1; i <= 7; ++i) s.push_back(0.5 * mortar * i);
  return s;
}

/// Coarse scales added for very thick mortars.
inline std::vector<double> extended_scales() { return {32.0, 40.0, 48.0}; }

inline void check_scale_fits(const ScalarField& image, const DoGParams& p) {
  const auto size = static_cast<std::size_t>(window_size(p));
  if (size > image.width() || size > image.height())
    throw ScaleTooLargeError("scale sigma_c=" + std::to_string(p.sigma_c) + " needs a " + std::to_string(size) +
                             "px window but the image is " + std::to_string(image.width()) + "x" +
                             std::to_string(image.height()));
}

/// One signed response and binary edge map per scale. `base` supplies the
/// surround and window ratios; its sigma_c is ignored.
inline EdgeMapStack build_edge_map_stack(const ScalarField& image, const std::vector<double>& scales,
                                         const DoGParams& base = {}, const StimulusSpec& source = {},
                                         std::size_t workers = 1) {
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0)) throw std::domain_error("scales must be > 0");
    if (i > 0 && !(scales[i] > scales[i - 1])) throw std::domain_error("scales must be strictly increasing");
    DoGParams p = base;
    p.sigma_c = scales[i];
    validate(p);
    check_scale_fits(image, p);
  }
  EdgeMapStack stack;
  stack.source_spec = source;
  stack.entries.resize(scales.size());
  parallel_for(scales.size(), workers, [&](std::size_t i) {
    DoGParams p = base;
    p.sigma_c = scales[i];
    ScalarField response = convolve(image, p);
    BinaryImage binary = binarize(response);
    stack.entries[i] = EdgeMapEntry{scales[i], std::move(response), std::move(binary)};
  });
  return stack;
}

}  // namespace cafewall

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "cafewall/field.hpp"
#include "cafewall/hough.hpp"
#include "cafewall/image_io.hpp"

namespace cafewall {

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kGreen{0, 255, 0};
inline constexpr Rgb kBlue{0, 0, 255};

inline RgbImage render_binary(const BinaryImage& bin) {
  RgbImage out(bin.width(), bin.height(), kBlack);
  for (std::size_t y = 0; y < bin.height(); ++y)
    for (std::size_t x = 0; x < bin.width(); ++x)
      if (bin(x, y)) out.set(x, y, kWhite);
  return out;
}

/// Pixels of the 1px Bresenham line between the rounded endpoints, clipped
/// to the image.
inline std::vector<std::array<long, 2>> raster_line(const Point& a, const Point& b, std::size_t w,
                                                    std::size_t h) {
  long x0 = std::lround(a.x), y0 = std::lround(a.y);
  const long x1 = std::lround(b.x), y1 = std::lround(b.y);
  const long dx = std::labs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const long dy = -std::labs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  std::vector<std::array<long, 2>> pts;
  for (;;) {
    if (x0 >= 0 && y0 >= 0 && x0 < static_cast<long>(w) && y0 < static_cast<long>(h)) pts.push_back({x0, y0});
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return pts;
}

/// Binary map in black/white with every segment in green and the longest
/// one (first on ties) in blue.
inline RgbImage render_overlay(const BinaryImage& bin, const std::vector<LineSegment>& segments) {
  RgbImage out = render_binary(bin);
  std::size_t longest = 0;
  for (std::size_t i = 1; i < segments.size(); ++i)
    if (segments[i].length > segments[longest].length) longest = i;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i == longest) continue;
    for (auto [x, y] : raster_line(segments[i].p1, segments[i].p2, bin.width(), bin.height()))
      out.set(x, y, kGreen);
  }
  if (!segments.empty())
    for (auto [x, y] : raster_line(segments[longest].p1, segments[longest].p2, bin.width(), bin.height()))
      out.set(x, y, kBlue);
  return out;
}

namespace detail {

// Positive half of the diverging map: white -> yellow -> orange -> red -> dark red.
// The negative half swaps the red and blue channels.
inline const std::array<Rgb, 256>& jetwhite_positive_lut() {
  static const std::array<Rgb, 256> lut = [] {
    constexpr std::array<std::array<double, 4>, 5> stops{{
        {0.00, 1.0, 1.0, 1.0},
        {0.25, 1.0, 1.0, 0.0},
        {0.50, 1.0, 0.5, 0.0},
        {0.75, 1.0, 0.0, 0.0},
        {1.00, 0.5, 0.0, 0.0},
    }};
    std::array<Rgb, 256> t{};
    for (int i = 0; i < 256; ++i) {
      const double v = i / 255.0;
      std::size_t k = 0;
      while (k + 2 < stops.size() && v > stops[k + 1][0]) ++k;
      const double f = (v - stops[k][0]) / (stops[k + 1][0] - stops[k][0]);
      for (int c = 0; c < 3; ++c) {
        const double x = stops[k][c + 1] + f * (stops[k + 1][c + 1] - stops[k][c + 1]);
        t[i][c] = static_cast<std::uint8_t>(std::lround(255.0 * x));
      }
    }
    return t;
  }();
  return lut;
}

}  // namespace detail

/// Colour for a value already scaled to [-1, 1].
inline Rgb jetwhite(double v) {
  const auto& lut = detail::jetwhite_positive_lut();
  const auto i = static_cast<std::size_t>(std::lround(std::min(std::abs(v), 1.0) * 255.0));
  Rgb c = lut[i];
  if (v < 0) std::swap(c[0], c[2]);
  return c;
}

/// Signed response on a diverging map: zero is white, positive warm,
/// negative cool; scaled symmetrically by the largest magnitude.
inline RgbImage render_colormap(const ScalarField& response) {
  double peak = 0.0;
  for (double v : response.values()) peak = std::max(peak, std::abs(v));
  RgbImage out(response.width(), response.height(), kWhite);
  if (peak == 0.0) return out;
  for (std::size_t y = 0; y < response.height(); ++y)
    for (std::size_t x = 0; x < response.width(); ++x) out.set(x, y, jetwhite(response(x, y) / peak));
  return out;
}

}  // namespace cafewall

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cafewall/field.hpp"

namespace cafewall {

/// Vote array over (rho, theta) for rho = x*cos(theta) + y*sin(theta), with
/// x the column, y the row and the origin at the top-left pixel.
/// theta covers [-90, 90) degrees; rho covers [-q*rho_step, q*rho_step]
/// where q = ceil(diagonal / rho_step).
class HoughAccumulator {
public:
  HoughAccumulator() = default;
  HoughAccumulator(std::size_t width, std::size_t height, double rho_step, double theta_step)
      : rho_step_(rho_step), theta_step_(theta_step) {
    if (!(rho_step > 0.0) || !(theta_step > 0.0)) throw std::domain_error("hough steps must be > 0");
    const double diag = std::hypot(width > 0 ? width - 1.0 : 0.0, height > 0 ? height - 1.0 : 0.0);
    const auto q = static_cast<std::size_t>(std::ceil(diag / rho_step));
    nrho_ = 2 * q + 1;
    rho0_ = -static_cast<double>(q) * rho_step;
    ntheta_ = static_cast<std::size_t>(std::lround(180.0 / theta_step));
    bins_.assign(nrho_ * ntheta_, 0);
  }

  std::size_t rho_bins() const noexcept { return nrho_; }
  std::size_t theta_bins() const noexcept { return ntheta_; }
  double rho_step() const noexcept { return rho_step_; }
  double theta_step() const noexcept { return theta_step_; }

  double rho(std::size_t i) const noexcept { return rho0_ + static_cast<double>(i) * rho_step_; }
  double theta_deg(std::size_t j) const noexcept { return -90.0 + static_cast<double>(j) * theta_step_; }

  /// Nearest rho bin, or -1 when out of range.
  long rho_index(double rho) const noexcept {
    const double f = std::floor((rho - rho0_) / rho_step_ + 0.5);
    return (f < 0 || f >= static_cast<double>(nrho_)) ? -1 : static_cast<long>(f);
  }

  std::uint32_t& at(std::size_t rho_i, std::size_t theta_j) { return bins_[theta_j * nrho_ + rho_i]; }
  std::uint32_t at(std::size_t rho_i, std::size_t theta_j) const { return bins_[theta_j * nrho_ + rho_i]; }

  std::uint64_t total() const noexcept {
    std::uint64_t t = 0;
    for (auto b : bins_) t += b;
    return t;
  }
  std::uint32_t max() const noexcept { return bins_.empty() ? 0 : *std::max_element(bins_.begin(), bins_.end()); }

private:
  double rho_step_ = 1.0;
  double theta_step_ = 1.0;
  double rho0_ = 0.0;
  std::size_t nrho_ = 0;
  std::size_t ntheta_ = 0;
  std::vector<std::uint32_t> bins_;  // theta-major
};

struct HoughParams {
  double rho_step = 1.0;
  double theta_step = 1.0;
  int num_peaks = 1000;
  double threshold_frac = 0.5;  ///< of the accumulator maximum
  int nhood_rho = 0;            ///< 0 = auto: smallest odd >= rho_bins/50
  int nhood_theta = 0;          ///< 0 = auto: smallest odd >= theta_bins/50
  double fill_gap = 40.0;
  double min_length = 450.0;
  double assign_tolerance = -1.0;  ///< < 0 = auto: rho_step/2 + 0.5

  friend bool operator==(const HoughParams&, const HoughParams&) = default;
};

inline void validate(const HoughParams& p) {
  if (p.num_peaks < 1) throw std::domain_error("HoughParams.num_peaks: must be >= 1");
  if (!(p.threshold_frac > 0.0 && p.threshold_frac <= 1.0))
    throw std::domain_error("HoughParams.threshold_frac: must lie in (0,1]");
  if (p.nhood_rho < 0 || (p.nhood_rho > 0 && p.nhood_rho % 2 == 0))
    throw std::domain_error("HoughParams.nhood_rho: must be odd (or 0 for auto)");
  if (p.nhood_theta < 0 || (p.nhood_theta > 0 && p.nhood_theta % 2 == 0))
    throw std::domain_error("HoughParams.nhood_theta: must be odd (or 0 for auto)");
  if (p.fill_gap < 0.0) throw std::domain_error("HoughParams.fill_gap: must be >= 0");
  if (p.min_length < 0.0) throw std::domain_error("HoughParams.min_length: must be >= 0");
}

namespace detail {
inline int smallest_odd_at_least(double v) {
  auto n = static_cast<int>(std::ceil(v));
  if (n < 1) n = 1;
  return n % 2 == 0 ? n + 1 : n;
}
}  // namespace detail

/// Fills in the auto neighbourhood sizes for a given accumulator shape.
inline HoughParams resolve(HoughParams p, const HoughAccumulator& acc) {
  if (p.nhood_rho == 0) p.nhood_rho = detail::smallest_odd_at_least(acc.rho_bins() / 50.0);
  if (p.nhood_theta == 0) p.nhood_theta = detail::smallest_odd_at_least(acc.theta_bins() / 50.0);
  if (p.assign_tolerance < 0.0) p.assign_tolerance = p.rho_step / 2.0 + 0.5;
  return p;
}

inline HoughAccumulator hough_transform(const BinaryImage& binary, double rho_step = 1.0,
                                        double theta_step = 1.0) {
  HoughAccumulator acc(binary.width(), binary.height(), rho_step, theta_step);
  const std::size_t nt = acc.theta_bins();
  const std::size_t nr = acc.rho_bins();
  std::vector<double> c(nt), s(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    const double t = acc.theta_deg(j) * std::numbers::pi / 180.0;
    c[j] = std::cos(t);
    s[j] = std::sin(t);
  }
  // Round rho to its bin before shifting by the integer offset q; adding q
  // first would blur ties at half-bin values.
  const auto q = static_cast<long>(std::lround(-acc.rho(0) / rho_step));
  const auto w = binary.width();
  for (std::size_t y = 0; y < binary.height(); ++y)
    for (std::size_t x = 0; x < w; ++x) {
      if (!binary(x, y)) continue;
      const double fx = static_cast<double>(x);
      const double fy = static_cast<double>(y);
      for (std::size_t j = 0; j < nt; ++j) {
        const double rho = fx * c[j] + fy * s[j];
        const long k = static_cast<long>(std::floor(rho / rho_step + 0.5)) + q;
        const auto i = static_cast<std::size_t>(std::clamp(k, 0L, static_cast<long>(nr) - 1));
        acc.at(i, j) += 1;
      }
    }
  return acc;
}

struct HoughPeak {
  std::size_t rho_index = 0;
  std::size_t theta_index = 0;
  double rho = 0.0;
  double theta_deg = 0.0;
  std::uint32_t votes = 0;

  friend bool operator==(const HoughPeak&, const HoughPeak&) = default;
};

/// Greedy peak picking: take the largest remaining bin (ties: smaller rho
/// index, then smaller theta index) while it reaches threshold_frac of the
/// original maximum, then zero its neighbourhood. The neighbourhood wraps
/// across the theta = +-90 seam with rho reflected; rho is clipped.
inline std::vector<HoughPeak> hough_peaks(const HoughAccumulator& acc, HoughParams params) {
  validate(params);
  params = resolve(params, acc);
  const std::uint32_t top = acc.max();
  std::vector<HoughPeak> peaks;
  if (top == 0) return peaks;
  const double threshold = params.threshold_frac * top;

  const std::size_t nr = acc.rho_bins();
  const std::size_t nt = acc.theta_bins();
  struct Cand {
    std::uint32_t v;
    std::uint32_t r;
    std::uint32_t t;
  };
  std::vector<Cand> cands;
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t r = 0; r < nr; ++r)
      if (const auto v = acc.at(r, t); v > 0 && v >= threshold)
        cands.push_back({v, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(t)});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.v != b.v) return a.v > b.v;
    if (a.r != b.r) return a.r < b.r;
    return a.t < b.t;
  });

  std::vector<std::uint8_t> suppressed(nr * nt, 0);
  const long hr = params.nhood_rho / 2;
  const long ht = params.nhood_theta / 2;
  const long lnr = static_cast<long>(nr);
  const long lnt = static_cast<long>(nt);
  for (const Cand& c : cands) {
    if (static_cast<int>(peaks.size()) >= params.num_peaks) break;
    if (suppressed[c.t * nr + c.r]) continue;
    peaks.push_back({c.r, c.t, acc.rho(c.r), acc.theta_deg(c.t), c.v});
    for (long dt = -ht; dt <= ht; ++dt) {
      long t = static_cast<long>(c.t) + dt;
      bool flip = false;
      if (t < 0) {
        t += lnt;
        flip = true;
      } else if (t >= lnt) {
        t -= lnt;
        flip = true;
      }
      for (long dr = -hr; dr <= hr; ++dr) {
        long r = static_cast<long>(c.r) + dr;
        if (flip) r = lnr - 1 - r;
        if (r < 0 || r >= lnr) continue;
        suppressed[static_cast<std::size_t>(t) * nr + static_cast<std::size_t>(r)] = 1;
      }
    }
  }
  return peaks;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct LineSegment {
  Point p1;
  Point p2;
  double theta_deg = 0.0;  ///< normal angle of the generating bin
  double rho = 0.0;
  double length = 0.0;
  std::size_t pixels = 0;  ///< foreground pixels merged into the segment

  friend bool operator==(const LineSegment&, const LineSegment&) = default;
};

/// Foreground pixels within `tolerance` of the line (rho, theta), ordered
/// along the line direction (-sin theta, cos theta).
inline std::vector<Point> pixels_on_line(const BinaryImage& binary, double rho, double theta_deg,
                                         double tolerance) {
  const double t = theta_deg * std::numbers::pi / 180.0;
  const double c = std::cos(t);
  const double s = std::sin(t);
  const long w = static_cast<long>(binary.width());
  const long h = static_cast<long>(binary.height());
  std::vector<Point> pts;
  auto consider = [&](long x, long y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    if (!binary(static_cast<std::size_t>(x), static_cast<std::size_t>(y))) return;
    if (std::abs(x * c + y * s - rho) <= tolerance) pts.push_back({double(x), double(y)});
  };
  // Walk the major axis and test the few cells across the band.
  if (std::abs(s) >= std::abs(c)) {
    for (long x = 0; x < w; ++x) {
      const double a = (rho - tolerance - x * c) / s;
      const double b = (rho + tolerance - x * c) / s;
      const long lo = static_cast<long>(std::floor(std::min(a, b))) - 1;
      const long hi = static_cast<long>(std::ceil(std::max(a, b))) + 1;
      for (long y = std::max(lo, 0L); y <= std::min(hi, h - 1); ++y) consider(x, y);
    }
  } else {
    for (long y = 0; y < h; ++y) {
      const double a = (rho - tolerance - y * s) / c;
      const double b = (rho + tolerance - y * s) / c;
      const long lo = static_cast<long>(std::floor(std::min(a, b))) - 1;
      const long hi = static_cast<long>(std::ceil(std::max(a, b))) + 1;
      for (long x = std::max(lo, 0L); x <= std::min(hi, w - 1); ++x) consider(x, y);
    }
  }
  std::sort(pts.begin(), pts.end(), [c, s](const Point& p, const Point& q) {
    const double tp = -p.x * s + p.y * c;
    const double tq = -q.x * s + q.y * c;
    if (tp != tq) return tp < tq;
    return p.x * c + p.y * s < q.x * c + q.y * s;
  });
  return pts;
}

/// Segments for each peak: member pixels are split wherever consecutive
/// pixels are more than fill_gap apart; runs shorter than min_length are
/// dropped. Endpoints are the extreme member pixels of each run.
inline std::vector<LineSegment> hough_lines(const BinaryImage& binary, const std::vector<HoughPeak>& peaks,
                                            HoughParams params) {
  validate(params);
  if (params.assign_tolerance < 0.0) params.assign_tolerance = params.rho_step / 2.0 + 0.5;
  std::vector<LineSegment> out;
  const double gap2 = params.fill_gap * params.fill_gap;
  for (const HoughPeak& pk : peaks) {
    const auto pts = pixels_on_line(binary, pk.rho, pk.theta_deg, params.assign_tolerance);
    std::size_t start = 0;
    auto flush = [&](std::size_t first, std::size_t last) {
      const Point a = pts[first];
      const Point b = pts[last];
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      if (len >= params.min_length) out.push_back({a, b, pk.theta_deg, pk.rho, len, last - first + 1});
    };
    for (std::size_t i = 1; i <= pts.size(); ++i) {
      if (i == pts.size()) {
        flush(start, i - 1);
        break;
      }
      const double dx = pts[i].x - pts[i - 1].x;
      const double dy = pts[i].y - pts[i - 1].y;
      if (dx * dx + dy * dy > gap2) {
        flush(start, i - 1);
        start = i;
      }
    }
  }
  return out;
}

}  // namespace cafewall

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cafewall/dogfilter.hpp"
#include "cafewall/hough.hpp"
#include "cafewall/parallel.hpp"

namespace cafewall {

enum class Orientation { H = 0, V = 1, D1 = 2, D2 = 3 };
inline constexpr std::array<Orientation, 4> kOrientations{Orientation::H, Orientation::V, Orientation::D1,
                                                          Orientation::D2};

inline constexpr double reference_deg(Orientation o) {
  switch (o) {
    case Orientation::H: return 0.0;
    case Orientation::V: return 90.0;
    case Orientation::D1: return 45.0;
    case Orientation::D2: return -45.0;
  }
  return 0.0;
}

inline std::string_view to_string(Orientation o) {
  switch (o) {
    case Orientation::H: return "H";
    case Orientation::V: return "V";
    case Orientation::D1: return "D1";
    case Orientation::D2: return "D2";
  }
  return "?";
}

/// Angle of a segment's direction as seen on screen (counter-clockwise from
/// the +x axis with y pointing up), in [-90, 90). The generating bin's normal
/// angle theta gives the direction theta + 90 in image coordinates.
inline double line_angle_deg(double theta_deg) {
  double a = std::fmod(-(theta_deg + 90.0), 180.0);
  if (a < -90.0) a += 180.0;
  if (a >= 90.0) a -= 180.0;
  return a;
}

inline double line_angle_deg(const LineSegment& s) { return line_angle_deg(s.theta_deg); }

struct BucketAssignment {
  Orientation bucket;
  double signed_dev;  ///< angle - reference, in [-22.5, 22.5)
};

/// Each reference owns the half-open interval [ref - 22.5, ref + 22.5)
/// modulo 180.
inline BucketAssignment assign_bucket(double angle_deg) {
  double a = std::fmod(angle_deg, 180.0);
  if (a < -90.0) a += 180.0;
  if (a >= 90.0) a -= 180.0;
  for (Orientation o : kOrientations) {
    double d = a - reference_deg(o);
    if (d >= 90.0) d -= 180.0;
    if (d < -90.0) d += 180.0;
    if (d >= -22.5 && d < 22.5) return {o, d};
  }
  return {Orientation::H, a};  // unreachable: the intervals tile the circle
}

struct OrientationBucket {
  Orientation reference = Orientation::H;
  std::vector<LineSegment> segments;
  std::vector<double> deviations;         ///< |angle - reference|
  std::vector<double> signed_deviations;  ///< angle - reference
};

inline std::array<OrientationBucket, 4> bucket_lines(const std::vector<LineSegment>& segments) {
  std::array<OrientationBucket, 4> buckets;
  for (Orientation o : kOrientations) buckets[static_cast<int>(o)].reference = o;
  for (const LineSegment& s : segments) {
    const auto [o, d] = assign_bucket(line_angle_deg(s));
    auto& b = buckets[static_cast<int>(o)];
    b.segments.push_back(s);
    b.deviations.push_back(std::abs(d));
    b.signed_deviations.push_back(d);
  }
  return buckets;
}

struct BucketStats {
  std::size_t n_lines = 0;
  std::optional<double> mean_abs_tilt;  ///< absent when no lines
  std::optional<double> std_error;      ///< absent when fewer than two lines
  std::optional<double> mean_signed_tilt;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;

  friend bool operator==(const BucketStats&, const BucketStats&) = default;
};

/// Mean and standard error (sample std / sqrt(n)) of the absolute deviations.
inline BucketStats summarize(const OrientationBucket& b) {
  BucketStats st;
  st.n_lines = b.deviations.size();
  if (st.n_lines == 0) return st;
  const double n = static_cast<double>(st.n_lines);
  double sum = 0.0, sum_signed = 0.0;
  for (std::size_t i = 0; i < st.n_lines; ++i) {
    sum += b.deviations[i];
    sum_signed += b.signed_deviations[i];
    if (b.signed_deviations[i] > 0) ++st.n_positive;
    if (b.signed_deviations[i] < 0) ++st.n_negative;
  }
  const double mean = sum / n;
  st.mean_abs_tilt = mean;
  st.mean_signed_tilt = sum_signed / n;
  if (st.n_lines >= 2) {
    double ss = 0.0;
    for (double d : b.deviations) ss += (d - mean) * (d - mean);
    st.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return st;
}

struct ScaleRow {
  double sigma_c = 0.0;
  std::array<BucketStats, 4> buckets;

  const BucketStats& operator[](Orientation o) const { return buckets[static_cast<int>(o)]; }
  friend bool operator==(const ScaleRow&, const ScaleRow&) = default;
};

struct MeanTiltTable {
  std::vector<ScaleRow> rows;  ///< ascending sigma_c

  const ScaleRow* find(double sigma_c) const {
    for (const auto& r : rows)
      if (std::abs(r.sigma_c - sigma_c) < 1e-9) return &r;
    return nullptr;
  }
  friend bool operator==(const MeanTiltTable&, const MeanTiltTable&) = default;
};

/// Per-scale intermediate results kept for rendering and diagnostics.
struct ScaleLines {
  double sigma_c = 0.0;
  std::vector<HoughPeak> peaks;
  std::vector<LineSegment> segments;
};

struct TiltAnalysis {
  MeanTiltTable table;
  std::vector<ScaleLines> lines;  ///< parallel to table.rows
};

/// Hough line extraction and bucketing on one binary edge map.
inline ScaleLines detect_lines(const BinaryImage& binary, double sigma_c, const HoughParams& params) {
  const HoughAccumulator acc = hough_transform(binary, params.rho_step, params.theta_step);
  const HoughParams resolved = resolve(params, acc);
  ScaleLines out;
  out.sigma_c = sigma_c;
  out.peaks = hough_peaks(acc, resolved);
  out.segments = hough_lines(binary, out.peaks, resolved);
  return out;
}

inline ScaleRow summarize_scale(double sigma_c, const std::vector<LineSegment>& segments) {
  ScaleRow row;
  row.sigma_c = sigma_c;
  const auto buckets = bucket_lines(segments);
  for (int i = 0; i < 4; ++i) row.buckets[i] = summarize(buckets[i]);
  return row;
}

/// Same Hough parameters at every scale.
inline TiltAnalysis analyze_stack(const EdgeMapStack& stack, const HoughParams& params, std::size_t workers = 1) {
  if (stack.entries.empty()) throw std::domain_error("analyze_stack: empty edge-map stack");
  validate(params);
  TiltAnalysis out;
  out.lines.resize(stack.entries.size());
  out.table.rows.resize(stack.entries.size());
  parallel_for(stack.entries.size(), workers, [&](std::size_t i) {
    const auto& e = stack.entries[i];
    out.lines[i] = detect_lines(e.binary, e.sigma_c, params);
    out.table.rows[i] = summarize_scale(e.sigma_c, out.lines[i].segments);
  });
  return out;
}

inline MeanTiltTable mean_tilt_table(const EdgeMapStack& stack, const HoughParams& params,
                                     std::size_t workers = 1) {
  return analyze_stack(stack, params, workers).table;
}

inline constexpr double kFovealScale = 4.0;

/// Horizontal mean tilt at the finest (foveal) scale; 0 when no lines.
inline double extract_fte(const MeanTiltTable& table) {
  const ScaleRow* row = table.find(kFovealScale);
  if (!row) throw std::domain_error("extract_fte: table has no sigma_c = 4 row");
  return (*row)[Orientation::H].mean_abs_tilt.value_or(0.0);
}

enum class Pmc { None, L, ML, M, MH, H };

inline std::string_view to_string(Pmc p) {
  switch (p) {
    case Pmc::None: return "None";
    case Pmc::L: return "L";
    case Pmc::ML: return "ML";
    case Pmc::M: return "M";
    case Pmc::MH: return "MH";
    case Pmc::H: return "H";
  }
  return "?";
}

inline Pmc pmc_from_string(std::string_view s) {
  for (Pmc p : {Pmc::None, Pmc::L, Pmc::ML, Pmc::M, Pmc::MH, Pmc::H})
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown PMC level: " + std::string(s));
}

inline constexpr double kPmcMinStep = 1.0;  // degrees

/// End of the persistence chain: starting at sigma_c = 4, advance while the
/// next scale has horizontal lines and its mean rose by at least 1 degree.
/// Empty when there are no horizontal lines at sigma_c = 4.
inline std::optional<double> pmc_chain_end(const MeanTiltTable& table) {
  std::size_t i = 0;
  while (i < table.rows.size() && std::abs(table.rows[i].sigma_c - kFovealScale) >= 1e-9) ++i;
  if (i == table.rows.size()) return std::nullopt;
  auto h = [&](std::size_t k) { return table.rows[k][Orientation::H].mean_abs_tilt; };
  if (!h(i)) return std::nullopt;
  while (i + 1 < table.rows.size()) {
    const auto next = h(i + 1);
    if (!next || *next - *h(i) < kPmcMinStep - 1e-9) break;
    ++i;
  }
  return table.rows[i].sigma_c;
}

inline Pmc pmc_for_scale(double sigma_star) {
  if (sigma_star <= 4.0) return Pmc::L;
  if (sigma_star <= 8.0) return Pmc::ML;
  if (sigma_star <= 12.0) return Pmc::M;
  if (sigma_star <= 16.0) return Pmc::MH;
  return Pmc::H;
}

inline Pmc extract_pmc(const MeanTiltTable& table) {
  const auto end = pmc_chain_end(table);
  return end ? pmc_for_scale(*end) : Pmc::None;
}

/// Re-grades persistence against the mortar width: q = sigma* / mortar.
inline Pmc correct_pmc_for_mortar_width(Pmc pmc, const MeanTiltTable& table, int mortar_px) {
  if (mortar_px <= 0 || pmc == Pmc::None) return pmc;
  const auto end = pmc_chain_end(table);
  if (!end) return pmc;
  const double q = *end / mortar_px;
  if (q < 1.0 - 1e-12) return Pmc::ML;
  if (q <= 1.0 + 1e-12) return Pmc::M;
  if (q <= 2.0 + 1e-12) return Pmc::MH;
  return Pmc::H;
}

/// (min, max) of the horizontal means along the persistence chain.
inline std::optional<std::pair<double, double>> h_tilt_range(const MeanTiltTable& table) {
  const auto end = pmc_chain_end(table);
  if (!end) return std::nullopt;
  std::optional<std::pair<double, double>> range;
  for (const auto& r : table.rows) {
    if (r.sigma_c < kFovealScale - 1e-9 || r.sigma_c > *end + 1e-9) continue;
    const auto m = r[Orientation::H].mean_abs_tilt;
    if (!m) continue;
    if (!range) range = std::pair{*m, *m};
    range->first = std::min(range->first, *m);
    range->second = std::max(range->second, *m);
  }
  return range;
}

enum class Strength { NoIllusion, VeryWeak, MediumLow, Medium, MediumHigh, Strong };

inline std::string_view to_string(Strength s) {
  switch (s) {
    case Strength::NoIllusion: return "NoIllusion";
    case Strength::VeryWeak: return "VeryWeak";
    case Strength::MediumLow: return "MediumLow";
    case Strength::Medium: return "Medium";
    case Strength::MediumHigh: return "MediumHigh";
    case Strength::Strong: return "Strong";
  }
  return "?";
}

inline Strength strength_from_string(std::string_view s) {
  for (Strength v : {Strength::NoIllusion, Strength::VeryWeak, Strength::MediumLow, Strength::Medium,
                     Strength::MediumHigh, Strength::Strong})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown strength class: " + std::string(s));
}

inline constexpr double kNegligibleFte = 1.0;  // degrees

/// Ordered decision list. A PMC of L with a non-negligible FTE grades as
/// MediumLow; None with a non-negligible FTE (not produced by the pipeline)
/// grades as NoIllusion.
inline Strength classify_strength(double fte, Pmc pmc) {
  if (fte == 0.0 && pmc == Pmc::None) return Strength::NoIllusion;
  if (fte < kNegligibleFte) return Strength::VeryWeak;
  switch (pmc) {
    case Pmc::None: return Strength::NoIllusion;
    case Pmc::L:
    case Pmc::ML: return Strength::MediumLow;
    case Pmc::M: return Strength::Medium;
    case Pmc::MH: return Strength::MediumHigh;
    case Pmc::H: return Strength::Strong;
  }
  return Strength::NoIllusion;
}

struct TiltFeatures {
  double fte = 0.0;
  Pmc pmc = Pmc::None;
  Pmc pmc_corrected = Pmc::None;
  std::optional<double> sigma_star;
  std::optional<std::pair<double, double>> h_range;
  Strength strength = Strength::NoIllusion;

  friend bool operator==(const TiltFeatures&, const TiltFeatures&) = default;
};

/// `correct_for_mortar` is the mortar width when the stimulus belongs to the
/// mortar-width family, whose persistence is graded relative to the mortar.
inline TiltFeatures extract_features(const MeanTiltTable& table, std::optional<int> correct_for_mortar) {
  TiltFeatures f;
  f.fte = extract_fte(table);
  f.pmc = extract_pmc(table);
  f.pmc_corrected = correct_for_mortar ? correct_pmc_for_mortar_width(f.pmc, table, *correct_for_mortar) : f.pmc;
  f.sigma_star = pmc_chain_end(table);
  f.h_range = h_tilt_range(table);
  f.strength = classify_strength(f.fte, f.pmc_corrected);
  return f;
}

/// Signed horizontal tilts grouped by the nearest mortar (or row seam).
struct MortarSignCount {
  double y = 0.0;
  std::size_t positive = 0;
  std::size_t negative = 0;
};

inline std::vector<MortarSignCount> signed_tilts_by_mortar(const std::vector<LineSegment>& segments,
                                                           const std::vector<double>& mortar_ys) {
  std::vector<MortarSignCount> out;
  for (double y : mortar_ys) out.push_back({y, 0, 0});
  if (out.empty()) return out;
  for (const LineSegment& s : segments) {
    const auto [o, d] = assign_bucket(line_angle_deg(s));
    if (o != Orientation::H || d == 0.0) continue;
    const double mid = 0.5 * (s.p1.y + s.p2.y);
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.size(); ++i)
      if (std::abs(out[i].y - mid) < std::abs(out[best].y - mid)) best = i;
    (d > 0 ? out[best].positive : out[best].negative) += 1;
  }
  return out;
}

inline bool has_mixed_sign_mortar(const std::vector<MortarSignCount>& counts) {
  for (const auto& c : counts)
    if (c.positive > 0 && c.negative > 0) return true;
  return false;
}

}  // namespace cafewall

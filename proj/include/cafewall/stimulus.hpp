#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cafewall/field.hpp"

namespace cafewall {

/// Full parameterization of one Café Wall variation. Luminances are relative
/// (0 = black, 1 = white).
struct StimulusSpec {
  int rows = 3;
  int cols = 8;
  int tile_px = 200;
  int mortar_px = 8;
  double mortar_lum = 0.5;
  double tile_lum_dark = 0.0;
  double tile_lum_light = 1.0;
  double phase_shift = 0.5;  ///< fraction of a tile between consecutive rows
  bool mirrored = false;
  bool hollow = false;
  int outline_px = 4;  ///< hollow variant only; replaces the mortar

  friend bool operator==(const StimulusSpec&, const StimulusSpec&) = default;
};

/// Throws std::domain_error naming the first offending field.
inline void validate(const StimulusSpec& s) {
  auto fail = [](std::string_view field, std::string_view why) {
    throw std::domain_error("StimulusSpec." + std::string(field) + ": " + std::string(why));
  };
  auto unit = [&](double v, std::string_view field) {
    if (!(v >= 0.0 && v <= 1.0)) fail(field, "must lie in [0,1]");
  };
  if (s.rows < 1) fail("rows", "must be >= 1");
  if (s.cols < 1) fail("cols", "must be >= 1");
  if (s.tile_px <= 0) fail("tile_px", "must be > 0");
  if (s.mortar_px < 0) fail("mortar_px", "must be >= 0");
  unit(s.mortar_lum, "mortar_lum");
  unit(s.tile_lum_dark, "tile_lum_dark");
  unit(s.tile_lum_light, "tile_lum_light");
  if (s.tile_lum_dark > s.tile_lum_light) fail("tile_lum_dark", "must be <= tile_lum_light");
  if (!(s.phase_shift >= 0.0 && s.phase_shift < 1.0)) fail("phase_shift", "must lie in [0,1)");
  if (s.hollow) {
    if (s.outline_px < 1) fail("outline_px", "must be >= 1");
    if (2 * s.outline_px > s.tile_px) fail("outline_px", "must be <= tile_px/2");
  }
}

/// Horizontal offset of tile row `r`, in pixels, in [0, tile_px).
inline int row_offset(const StimulusSpec& s, int r) {
  const double t = s.tile_px;
  auto off = static_cast<int>(std::lround(std::fmod(r * s.phase_shift * t, t)));
  return off % s.tile_px;
}

inline std::size_t stimulus_width(const StimulusSpec& s) {
  return static_cast<std::size_t>(s.cols) * s.tile_px;
}

inline std::size_t stimulus_height(const StimulusSpec& s) {
  const int mortar = s.hollow ? 0 : s.mortar_px;
  return static_cast<std::size_t>(s.rows) * s.tile_px + static_cast<std::size_t>(s.rows - 1) * mortar;
}

/// y coordinate (pixel centres) of the boundary between tile rows r and r+1,
/// i.e. the middle of each mortar strip, or the seam between hollow rows.
inline std::vector<double> mortar_centerlines(const StimulusSpec& s) {
  std::vector<double> ys;
  const int mortar = s.hollow ? 0 : s.mortar_px;
  for (int r = 0; r + 1 < s.rows; ++r)
    ys.push_back((r + 1) * s.tile_px + r * mortar + mortar / 2.0 - 0.5);
  return ys;
}

namespace detail {

// Index of the tile covering column x in tile row r, after wrapping.
inline int tile_index(const StimulusSpec& s, int r, int x, int* local_x = nullptr) {
  const int row_w = s.cols * s.tile_px;
  int u = (x - row_offset(s, r)) % row_w;
  if (u < 0) u += row_w;
  if (local_x) *local_x = u % s.tile_px;
  return u / s.tile_px;
}

inline ScalarField maybe_mirror(ScalarField f, bool mirrored) {
  return mirrored ? mirror(f) : f;
}

}  // namespace detail

/// Filled-tile Café Wall. Tiles alternate dark/light from the row offset,
/// wrapping modulo the row width; mortar strips separate tile rows.
inline ScalarField generate_cafe_wall(const StimulusSpec& s) {
  validate(s);
  if (s.hollow) throw std::domain_error("StimulusSpec.hollow: use generate_hollow_square");

  ScalarField img(stimulus_width(s), stimulus_height(s), s.mortar_lum);
  const int band = s.tile_px + s.mortar_px;
  for (int r = 0; r < s.rows; ++r) {
    const int y0 = r * band;
    std::vector<double> line(img.width());
    for (int x = 0; x < static_cast<int>(img.width()); ++x)
      line[x] = detail::tile_index(s, r, x) % 2 == 0 ? s.tile_lum_dark : s.tile_lum_light;
    for (int y = y0; y < y0 + s.tile_px; ++y) {
      auto dst = img.row(static_cast<std::size_t>(y));
      std::copy(line.begin(), line.end(), dst.begin());
    }
  }
  return detail::maybe_mirror(std::move(img), s.mirrored);
}

/// Hollow Square: every tile is an outline of `outline_px` (tile_lum_dark)
/// on a tile_lum_light background. Rows abut with no mortar.
inline ScalarField generate_hollow_square(const StimulusSpec& s) {
  validate(s);
  if (!s.hollow) throw std::domain_error("StimulusSpec.hollow: must be true for hollow square");

  ScalarField img(stimulus_width(s), stimulus_height(s), s.tile_lum_light);
  const int t = s.tile_px;
  const int o = s.outline_px;
  for (int y = 0; y < static_cast<int>(img.height()); ++y) {
    const int r = y / t;
    const int ly = y % t;
    const bool edge_row = ly < o || ly >= t - o;
    for (int x = 0; x < static_cast<int>(img.width()); ++x) {
      int lx = 0;
      detail::tile_index(s, r, x, &lx);
      if (edge_row || lx < o || lx >= t - o) img(x, y) = s.tile_lum_dark;
    }
  }
  return detail::maybe_mirror(std::move(img), s.mirrored);
}

inline ScalarField generate(const StimulusSpec& s) {
  return s.hollow ? generate_hollow_square(s) : generate_cafe_wall(s);
}

enum class Family { MortarLuminance, MortarWidth, GreyTiles, PhaseShift, DirectionChange, HollowSquare };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::MortarLuminance: return "mortar-luminance";
    case Family::MortarWidth: return "mortar-width";
    case Family::GreyTiles: return "grey-tiles";
    case Family::PhaseShift: return "phase-shift";
    case Family::DirectionChange: return "direction-change";
    case Family::HollowSquare: return "hollow-square";
  }
  return "?";
}

struct NamedStimulus {
  std::string name;
  Family family;
  StimulusSpec spec;
};

/// The 3x8-tile, 200px canonical Café Wall: 8px mid-grey mortar, half-tile shift.
inline StimulusSpec canonical_spec() { return StimulusSpec{}; }

/// The eighteen variations studied. "ML=0.50" and "MW=8" are the same spec.
inline std::vector<NamedStimulus> fig4_suite() {
  std::vector<NamedStimulus> suite;
  const StimulusSpec base = canonical_spec();

  for (double ml : {0.00, 0.25, 0.50, 0.75, 1.00}) {
    StimulusSpec s = base;
    s.mortar_lum = ml;
    std::ostringstream name;
    name.setf(std::ios::fixed);
    name.precision(2);
    name << "ML=" << ml;
    suite.push_back({name.str(), Family::MortarLuminance, s});
  }
  for (int mw : {0, 4, 8, 16, 32, 64}) {
    StimulusSpec s = base;
    s.mortar_px = mw;
    suite.push_back({"MW=" + std::to_string(mw), Family::MortarWidth, s});
  }
  for (const char* ml : {"0.00", "0.50", "1.00"}) {
    StimulusSpec s = base;
    s.mortar_lum = std::stod(ml);
    s.tile_lum_dark = 0.25;
    s.tile_lum_light = 0.75;
    suite.push_back({std::string("GreyTiles ML=") + ml, Family::GreyTiles, s});
  }
  {
    StimulusSpec s = base;
    s.phase_shift = 1.0 / 3.0;
    suite.push_back({"Shift=1/3", Family::PhaseShift, s});
    s.phase_shift = 1.0 / 5.0;
    suite.push_back({"Shift=1/5", Family::PhaseShift, s});
  }
  {
    StimulusSpec s = base;
    s.mirrored = true;
    suite.push_back({"Direction Change", Family::DirectionChange, s});
  }
  {
    StimulusSpec s = base;
    s.hollow = true;
    s.outline_px = base.mortar_px / 2;
    suite.push_back({"Hollow Square", Family::HollowSquare, s});
  }
  return suite;
}

inline const NamedStimulus& find_stimulus(const std::vector<NamedStimulus>& suite, std::string_view name) {
  for (const auto& n : suite)
    if (n.name == name) return n;
  throw std::invalid_argument("unknown stimulus: " + std::string(name));
}

/// Filesystem-safe form of a stimulus name ("Shift=1/3" -> "Shift=1_3").
inline std::string slug(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '.' || c == '=' || c == '-' || c == '_';
    out.push_back(keep ? c : '_');
  }
  return out;
}

// Plain-text "key = value" form, one field per line. '#' starts a comment.

inline std::string to_config_text(const StimulusSpec& s) {
  std::ostringstream os;
  os.precision(17);
  os << "rows = " << s.rows << '\n'
     << "cols = " << s.cols << '\n'
     << "tile_px = " << s.tile_px << '\n'
     << "mortar_px = " << s.mortar_px << '\n'
     << "mortar_lum = " << s.mortar_lum << '\n'
     << "tile_lum_dark = " << s.tile_lum_dark << '\n'
     << "tile_lum_light = " << s.tile_lum_light << '\n'
     << "phase_shift = " << s.phase_shift << '\n'
     << "mirrored = " << (s.mirrored ? "true" : "false") << '\n'
     << "hollow = " << (s.hollow ? "true" : "false") << '\n'
     << "outline_px = " << s.outline_px << '\n';
  return os.str();
}

namespace detail {

inline std::string trim(std::string_view v) {
  const auto b = v.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = v.find_last_not_of(" \t\r");
  return std::string(v.substr(b, e - b + 1));
}

inline std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    kv[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

inline double parse_number(const std::string& key, const std::string& v) {
  // Accept simple fractions such as "1/3".
  try {
    if (auto slash = v.find('/'); slash != std::string::npos)
      return std::stod(v.substr(0, slash)) / std::stod(v.substr(slash + 1));
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not a number: '" + v + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_number(key, v);
  if (d != std::floor(d)) throw std::invalid_argument(key + ": not an integer: '" + v + "'");
  return static_cast<int>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(key + ": not a boolean: '" + v + "'");
}

}  // namespace detail

/// Applies recognised keys onto `base`; unknown keys are an error.
inline StimulusSpec apply_spec_keys(StimulusSpec s, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "rows") s.rows = detail::parse_int(k, v);
    else if (k == "cols") s.cols = detail::parse_int(k, v);
    else if (k == "tile_px") s.tile_px = detail::parse_int(k, v);
    else if (k == "mortar_px") s.mortar_px = detail::parse_int(k, v);
    else if (k == "mortar_lum") s.mortar_lum = detail::parse_number(k, v);
    else if (k == "tile_lum_dark") s.tile_lum_dark = detail::parse_number(k, v);
    else if (k == "tile_lum_light") s.tile_lum_light = detail::parse_number(k, v);
    else if (k == "phase_shift") s.phase_shift = detail::parse_number(k, v);
    else if (k == "mirrored") s.mirrored = detail::parse_bool(k, v);
    else if (k == "hollow") s.hollow = detail::parse_bool(k, v);
    else if (k == "outline_px") s.outline_px = detail::parse_int(k, v);
    else throw std::invalid_argument("unknown stimulus key: " + k);
  }
  return s;
}

inline StimulusSpec parse_spec_text(std::string_view text) {
  StimulusSpec s = apply_spec_keys(canonical_spec(), detail::parse_key_values(text));
  validate(s);
  return s;
}

}  // namespace cafewall

#pragma once

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cafewall/dogfilter.hpp"
#include "cafewall/hough.hpp"
#include "cafewall/image_io.hpp"
#include "cafewall/render.hpp"
#include "cafewall/stimulus.hpp"
#include "cafewall/tiltanalysis.hpp"

namespace cafewall {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// Everything needed to recompute a run: stimulus, filter, line detector and
/// the small decisions that sit between them.
struct ParameterRecord {
  StimulusSpec stimulus;
  double surround_ratio = 2.0;
  double window_ratio = 8.0;
  std::vector<double> scales;
  std::string border = "replicate";
  double binarize_epsilon = kResponseEpsilon;
  HoughParams hough;
  std::optional<int> mortar_correction;  ///< mortar width used for PMC correction, if any

  friend bool operator==(const ParameterRecord&, const ParameterRecord&) = default;
};

struct ScaleArtifacts {
  double sigma_c = 0.0;
  fs::path binary;
  fs::path response;
  fs::path overlay;
};

struct RunReport {
  std::string name;
  StimulusSpec spec;
  std::vector<ScaleArtifacts> artifacts;
  MeanTiltTable table;
  TiltFeatures features;
  ParameterRecord params;
};

// ---- number formatting ----

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return {buf, end};
}

namespace detail {

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

inline std::size_t parse_count(const std::string& s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw std::invalid_argument("not a count: '" + s + "'");
  return v;
}

inline std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

inline std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  q.push_back('"');
  return q;
}

inline Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline std::optional<double> opt_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline Orientation orientation_from_string(std::string_view s) {
  for (Orientation o : kOrientations)
    if (to_string(o) == s) return o;
  throw std::invalid_argument("unknown orientation: " + std::string(s));
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace detail

inline std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---- mean tilt table ----

inline constexpr const char* kTiltCsvHeader =
    "sigma_c,bucket,n_lines,mean_abs_tilt,std_error,mean_signed_tilt,n_positive,n_negative";

/// One line per (scale, bucket); empty cells where a statistic is undefined.
inline std::string table_to_csv(const MeanTiltTable& t) {
  std::string out = std::string(kTiltCsvHeader) + "\n";
  for (const ScaleRow& r : t.rows)
    for (Orientation o : kOrientations) {
      const BucketStats& b = r[o];
      out += format_double(r.sigma_c) + "," + std::string(to_string(o)) + "," + std::to_string(b.n_lines) + "," +
             detail::opt(b.mean_abs_tilt) + "," + detail::opt(b.std_error) + "," + detail::opt(b.mean_signed_tilt) +
             "," + std::to_string(b.n_positive) + "," + std::to_string(b.n_negative) + "\n";
    }
  return out;
}

inline MeanTiltTable table_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::split_csv_line(line) != detail::split_csv_line(kTiltCsvHeader))
    throw std::invalid_argument("tilt table CSV: bad header");
  MeanTiltTable t;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 8) throw std::invalid_argument("tilt table CSV: expected 8 fields: " + line);
    const double sigma = detail::parse_double(f[0]);
    if (t.rows.empty() || t.rows.back().sigma_c != sigma) {
      t.rows.emplace_back();
      t.rows.back().sigma_c = sigma;
    }
    BucketStats& b = t.rows.back().buckets[static_cast<int>(detail::orientation_from_string(f[1]))];
    b.n_lines = detail::parse_count(f[2]);
    b.mean_abs_tilt = detail::parse_opt(f[3]);
    b.std_error = detail::parse_opt(f[4]);
    b.mean_signed_tilt = detail::parse_opt(f[5]);
    b.n_positive = detail::parse_count(f[6]);
    b.n_negative = detail::parse_count(f[7]);
  }
  return t;
}

inline Json table_to_json(const MeanTiltTable& t) {
  Json rows = Json::array();
  for (const ScaleRow& r : t.rows) {
    Json buckets = Json::object();
    for (Orientation o : kOrientations) {
      const BucketStats& b = r[o];
      buckets[std::string(to_string(o))] = {
          {"n_lines", b.n_lines},
          {"mean_abs_tilt", detail::opt_json(b.mean_abs_tilt)},
          {"std_error", detail::opt_json(b.std_error)},
          {"mean_signed_tilt", detail::opt_json(b.mean_signed_tilt)},
          {"n_positive", b.n_positive},
          {"n_negative", b.n_negative},
      };
    }
    rows.push_back({{"sigma_c", r.sigma_c}, {"buckets", std::move(buckets)}});
  }
  return rows;
}

inline MeanTiltTable table_from_json(const Json& j) {
  MeanTiltTable t;
  for (const Json& jr : j) {
    ScaleRow r;
    r.sigma_c = jr.at("sigma_c").get<double>();
    for (Orientation o : kOrientations) {
      const Json& jb = jr.at("buckets").at(std::string(to_string(o)));
      BucketStats& b = r.buckets[static_cast<int>(o)];
      b.n_lines = jb.at("n_lines").get<std::size_t>();
      b.mean_abs_tilt = detail::opt_from_json(jb.at("mean_abs_tilt"));
      b.std_error = detail::opt_from_json(jb.at("std_error"));
      b.mean_signed_tilt = detail::opt_from_json(jb.at("mean_signed_tilt"));
      b.n_positive = jb.at("n_positive").get<std::size_t>();
      b.n_negative = jb.at("n_negative").get<std::size_t>();
    }
    t.rows.push_back(r);
  }
  return t;
}

// ---- features and parameters ----

inline Json features_to_json(const TiltFeatures& f) {
  Json j = {
      {"fte", f.fte},
      {"pmc", std::string(to_string(f.pmc))},
      {"pmc_corrected", std::string(to_string(f.pmc_corrected))},
      {"sigma_star", detail::opt_json(f.sigma_star)},
      {"h_range", nullptr},
      {"strength", std::string(to_string(f.strength))},
  };
  if (f.h_range) j["h_range"] = {f.h_range->first, f.h_range->second};
  return j;
}

inline TiltFeatures features_from_json(const Json& j) {
  TiltFeatures f;
  f.fte = j.at("fte").get<double>();
  f.pmc = pmc_from_string(j.at("pmc").get<std::string>());
  f.pmc_corrected = pmc_from_string(j.at("pmc_corrected").get<std::string>());
  f.sigma_star = detail::opt_from_json(j.at("sigma_star"));
  if (!j.at("h_range").is_null()) f.h_range = std::pair{j["h_range"][0].get<double>(), j["h_range"][1].get<double>()};
  f.strength = strength_from_string(j.at("strength").get<std::string>());
  return f;
}

inline Json spec_to_json(const StimulusSpec& s) {
  return {
      {"rows", s.rows},
      {"cols", s.cols},
      {"tile_px", s.tile_px},
      {"mortar_px", s.mortar_px},
      {"mortar_lum", s.mortar_lum},
      {"tile_lum_dark", s.tile_lum_dark},
      {"tile_lum_light", s.tile_lum_light},
      {"phase_shift", s.phase_shift},
      {"mirrored", s.mirrored},
      {"hollow", s.hollow},
      {"outline_px", s.outline_px},
  };
}

inline StimulusSpec spec_from_json(const Json& j) {
  StimulusSpec s;
  s.rows = j.at("rows").get<int>();
  s.cols = j.at("cols").get<int>();
  s.tile_px = j.at("tile_px").get<int>();
  s.mortar_px = j.at("mortar_px").get<int>();
  s.mortar_lum = j.at("mortar_lum").get<double>();
  s.tile_lum_dark = j.at("tile_lum_dark").get<double>();
  s.tile_lum_light = j.at("tile_lum_light").get<double>();
  s.phase_shift = j.at("phase_shift").get<double>();
  s.mirrored = j.at("mirrored").get<bool>();
  s.hollow = j.at("hollow").get<bool>();
  s.outline_px = j.at("outline_px").get<int>();
  validate(s);
  return s;
}

inline Json hough_to_json(const HoughParams& h) {
  return {
      {"rho_step", h.rho_step},
      {"theta_step", h.theta_step},
      {"num_peaks", h.num_peaks},
      {"threshold_frac", h.threshold_frac},
      {"nhood_rho", h.nhood_rho},
      {"nhood_theta", h.nhood_theta},
      {"fill_gap", h.fill_gap},
      {"min_length", h.min_length},
      {"assign_tolerance", h.assign_tolerance},
  };
}

inline HoughParams hough_from_json(const Json& j) {
  HoughParams h;
  h.rho_step = j.at("rho_step").get<double>();
  h.theta_step = j.at("theta_step").get<double>();
  h.num_peaks = j.at("num_peaks").get<int>();
  h.threshold_frac = j.at("threshold_frac").get<double>();
  h.nhood_rho = j.at("nhood_rho").get<int>();
  h.nhood_theta = j.at("nhood_theta").get<int>();
  h.fill_gap = j.at("fill_gap").get<double>();
  h.min_length = j.at("min_length").get<double>();
  h.assign_tolerance = j.at("assign_tolerance").get<double>();
  validate(h);
  return h;
}

inline Json params_to_json(const ParameterRecord& p) {
  return {
      {"stimulus", spec_to_json(p.stimulus)},
      {"dog",
       {{"surround_ratio", p.surround_ratio},
        {"window_ratio", p.window_ratio},
        {"scales", p.scales},
        {"border", p.border},
        {"binarize_epsilon", p.binarize_epsilon}}},
      {"hough", hough_to_json(p.hough)},
      {"mortar_correction", p.mortar_correction ? Json(*p.mortar_correction) : Json(nullptr)},
  };
}

inline ParameterRecord params_from_json(const Json& j) {
  ParameterRecord p;
  p.stimulus = spec_from_json(j.at("stimulus"));
  const Json& d = j.at("dog");
  p.surround_ratio = d.at("surround_ratio").get<double>();
  p.window_ratio = d.at("window_ratio").get<double>();
  p.scales = d.at("scales").get<std::vector<double>>();
  p.border = d.at("border").get<std::string>();
  p.binarize_epsilon = d.at("binarize_epsilon").get<double>();
  p.hough = hough_from_json(j.at("hough"));
  if (!j.at("mortar_correction").is_null()) p.mortar_correction = j["mortar_correction"].get<int>();
  return p;
}

/// Per-stimulus document: name, parameters, features and the full table.
inline Json report_to_json(const RunReport& r) {
  return {
      {"stimulus", r.name},
      {"params", params_to_json(r.params)},
      {"features", features_to_json(r.features)},
      {"table", table_to_json(r.table)},
  };
}

inline RunReport report_from_json(const Json& j) {
  RunReport r;
  r.name = j.at("stimulus").get<std::string>();
  r.params = params_from_json(j.at("params"));
  r.spec = r.params.stimulus;
  r.features = features_from_json(j.at("features"));
  r.table = table_from_json(j.at("table"));
  return r;
}

// ---- summary ----

struct SummaryRow {
  std::string stimulus;
  double fte = 0.0;
  Pmc pmc = Pmc::None;
  Pmc pmc_corrected = Pmc::None;
  std::optional<std::pair<double, double>> h_range;
  Strength strength = Strength::NoIllusion;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

/// Rows ordered by strength class, then FTE, then name; ties keep input order.
inline std::vector<SummaryRow> emit_summary(const std::vector<RunReport>& reports) {
  std::vector<SummaryRow> rows;
  for (const RunReport& r : reports)
    rows.push_back({r.name, r.features.fte, r.features.pmc, r.features.pmc_corrected, r.features.h_range,
                    r.features.strength});
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    if (a.strength != b.strength) return a.strength < b.strength;
    return a.fte < b.fte;
  });
  return rows;
}

inline constexpr const char* kSummaryCsvHeader = "stimulus,fte,pmc,pmc_corrected,h_range_min,h_range_max,strength";

inline std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::string out = std::string(kSummaryCsvHeader) + "\n";
  for (const SummaryRow& r : rows) {
    out += detail::csv_field(r.stimulus) + "," + format_double(r.fte) + "," + std::string(to_string(r.pmc)) + "," +
           std::string(to_string(r.pmc_corrected)) + ",";
    if (r.h_range) out += format_double(r.h_range->first) + "," + format_double(r.h_range->second);
    else out += ",";
    out += "," + std::string(to_string(r.strength)) + "\n";
  }
  return out;
}

inline std::vector<SummaryRow> summary_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::split_csv_line(line) != detail::split_csv_line(kSummaryCsvHeader))
    throw std::invalid_argument("summary CSV: bad header");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) throw std::invalid_argument("summary CSV: expected 7 fields: " + line);
    SummaryRow r;
    r.stimulus = f[0];
    r.fte = detail::parse_double(f[1]);
    r.pmc = pmc_from_string(f[2]);
    r.pmc_corrected = pmc_from_string(f[3]);
    if (!f[4].empty()) r.h_range = std::pair{detail::parse_double(f[4]), detail::parse_double(f[5])};
    r.strength = strength_from_string(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Json summary_to_json(const std::vector<SummaryRow>& rows) {
  Json out = Json::array();
  for (const SummaryRow& r : rows) {
    Json j = {
        {"stimulus", r.stimulus},
        {"fte", r.fte},
        {"pmc", std::string(to_string(r.pmc))},
        {"pmc_corrected", std::string(to_string(r.pmc_corrected))},
        {"h_range", nullptr},
        {"strength", std::string(to_string(r.strength))},
    };
    if (r.h_range) j["h_range"] = {r.h_range->first, r.h_range->second};
    out.push_back(std::move(j));
  }
  return out;
}

inline std::vector<SummaryRow> summary_from_json(const Json& j) {
  std::vector<SummaryRow> rows;
  for (const Json& jr : j) {
    SummaryRow r;
    r.stimulus = jr.at("stimulus").get<std::string>();
    r.fte = jr.at("fte").get<double>();
    r.pmc = pmc_from_string(jr.at("pmc").get<std::string>());
    r.pmc_corrected = pmc_from_string(jr.at("pmc_corrected").get<std::string>());
    if (!jr.at("h_range").is_null())
      r.h_range = std::pair{jr["h_range"][0].get<double>(), jr["h_range"][1].get<double>()};
    r.strength = strength_from_string(jr.at("strength").get<std::string>());
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Human-readable summary for the terminal.
inline std::string summary_table_text(const std::vector<SummaryRow>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-20s %7s %5s %5s %15s  %s\n", "stimulus", "FTE", "PMC", "PMC*", "H-range",
                "strength");
  out += buf;
  for (const SummaryRow& r : rows) {
    char range[64] = "-";
    if (r.h_range) std::snprintf(range, sizeof range, "%.2f..%.2f", r.h_range->first, r.h_range->second);
    std::snprintf(buf, sizeof buf, "%-20s %7.2f %5s %5s %15s  %s\n", r.stimulus.c_str(), r.fte,
                  std::string(to_string(r.pmc)).c_str(), std::string(to_string(r.pmc_corrected)).c_str(), range,
                  std::string(to_string(r.strength)).c_str());
    out += buf;
  }
  return out;
}

// ---- files ----

/// Directory name for one scale: "sigma_4", "sigma_2.5".
inline std::string scale_dir(double sigma_c) { return "sigma_" + format_double(sigma_c); }

/// Writes binary, response colormap and overlay PNGs for every scale under
/// root/<slug>/<scale>/ and returns their paths.
inline std::vector<ScaleArtifacts> write_scale_images(const fs::path& stim_dir, const EdgeMapStack& stack,
                                                      const TiltAnalysis& analysis) {
  std::vector<ScaleArtifacts> out;
  for (std::size_t i = 0; i < stack.entries.size(); ++i) {
    const EdgeMapEntry& e = stack.entries[i];
    const fs::path dir = stim_dir / scale_dir(e.sigma_c);
    fs::create_directories(dir);
    ScaleArtifacts a{e.sigma_c, dir / "binary.png", dir / "response.png", dir / "overlay.png"};
    write_png(a.binary, e.binary);
    write_png(a.response, render_colormap(e.response));
    write_png(a.overlay, render_overlay(e.binary, analysis.lines[i].segments));
    out.push_back(std::move(a));
  }
  return out;
}

/// tilts.csv, tilts.json and params.json for one stimulus.
inline void write_report_tables(const fs::path& stim_dir, const RunReport& r) {
  fs::create_directories(stim_dir);
  detail::write_text(stim_dir / "tilts.csv", table_to_csv(r.table));
  detail::write_text(stim_dir / "tilts.json", report_to_json(r).dump(2) + "\n");
}

inline void write_summary(const fs::path& root, const std::vector<SummaryRow>& rows) {
  fs::create_directories(root);
  detail::write_text(root / "summary.csv", summary_to_csv(rows));
  detail::write_text(root / "summary.json", summary_to_json(rows).dump(2) + "\n");
}

}  // namespace cafewall

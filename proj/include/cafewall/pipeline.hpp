#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cafewall/dogfilter.hpp"
#include "cafewall/hough.hpp"
#include "cafewall/parallel.hpp"
#include "cafewall/report.hpp"
#include "cafewall/stimulus.hpp"
#include "cafewall/tiltanalysis.hpp"

namespace cafewall {

inline constexpr const char* kOutputEnvVar = "CAFEWALL_OUT";

/// Batch configuration. Defaults reproduce the canonical model settings.
struct RunConfig {
  std::vector<std::string> stimuli;  ///< suite names; empty together with spec_files means the whole suite
  std::vector<fs::path> spec_files;  ///< inline stimulus specs, named after the file stem
  std::optional<std::vector<double>> scales;  ///< nullopt = auto from scale_base
  double scale_base = 8.0;
  double surround_ratio = 2.0;
  double window_ratio = 8.0;
  HoughParams hough;
  fs::path out = "out";
  bool extended_scales = false;
  bool mortar_correction = true;
  bool images = true;
  std::size_t workers = 1;
};

/// Exit codes for the command-line driver.
enum class ExitCode { Ok = 0, BadInput = 1, RuntimeFailure = 2 };

/// A failure tagged with the pipeline stage and whether the input was at fault.
class PipelineError : public std::runtime_error {
public:
  PipelineError(std::string stage, std::string subject, ExitCode code, const std::string& what)
      : std::runtime_error(stage + (subject.empty() ? "" : " [" + subject + "]") + ": " + what),
        stage_(std::move(stage)),
        code_(code) {}

  const std::string& stage() const noexcept { return stage_; }
  ExitCode code() const noexcept { return code_; }

private:
  std::string stage_;
  ExitCode code_;
};

namespace detail {

template <class Fn>
auto in_stage(const std::string& stage, const std::string& subject, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw PipelineError(stage, subject, ExitCode::BadInput, e.what());
  } catch (const std::domain_error& e) {
    throw PipelineError(stage, subject, ExitCode::BadInput, e.what());
  } catch (const std::exception& e) {
    throw PipelineError(stage, subject, ExitCode::RuntimeFailure, e.what());
  }
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

inline std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

}  // namespace detail

inline std::vector<double> parse_scale_list(const std::string& v) {
  std::vector<double> out;
  for (const auto& item : detail::split_list(v)) out.push_back(detail::parse_number("scales", item));
  if (out.empty()) throw std::invalid_argument("scales: empty list");
  return out;
}

/// Applies "key = value" pairs from a config file onto `cfg`.
inline RunConfig apply_config_keys(RunConfig cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "stimuli") {
      cfg.stimuli = detail::split_list(v);
      if (cfg.stimuli == std::vector<std::string>{"fig4"}) cfg.stimuli.clear();
    }
    else if (k == "spec_files") {
      cfg.spec_files.clear();
      for (const auto& p : detail::split_list(v)) cfg.spec_files.emplace_back(p);
    } else if (k == "scales") {
      if (v == "auto") cfg.scales.reset();
      else cfg.scales = parse_scale_list(v);
    } else if (k == "scale_base") cfg.scale_base = detail::parse_number(k, v);
    else if (k == "surround_ratio") cfg.surround_ratio = detail::parse_number(k, v);
    else if (k == "window_ratio") cfg.window_ratio = detail::parse_number(k, v);
    else if (k == "rho_step") cfg.hough.rho_step = detail::parse_number(k, v);
    else if (k == "theta_step") cfg.hough.theta_step = detail::parse_number(k, v);
    else if (k == "num_peaks") cfg.hough.num_peaks = detail::parse_int(k, v);
    else if (k == "threshold_frac") cfg.hough.threshold_frac = detail::parse_number(k, v);
    else if (k == "nhood_rho") cfg.hough.nhood_rho = v == "auto" ? 0 : detail::parse_int(k, v);
    else if (k == "nhood_theta") cfg.hough.nhood_theta = v == "auto" ? 0 : detail::parse_int(k, v);
    else if (k == "fill_gap") cfg.hough.fill_gap = detail::parse_number(k, v);
    else if (k == "min_length") cfg.hough.min_length = detail::parse_number(k, v);
    else if (k == "assign_tolerance") cfg.hough.assign_tolerance = v == "auto" ? -1.0 : detail::parse_number(k, v);
    else if (k == "border") {
      if (v != "replicate") throw std::invalid_argument("border: only 'replicate' is supported");
    } else if (k == "binarize_epsilon") {
      if (detail::parse_number(k, v) != kResponseEpsilon)
        throw std::invalid_argument("binarize_epsilon: fixed at " + format_double(kResponseEpsilon));
    }
    else if (k == "out") cfg.out = v;
    else if (k == "extended_scales") cfg.extended_scales = detail::parse_bool(k, v);
    else if (k == "mortar_correction") cfg.mortar_correction = detail::parse_bool(k, v);
    else if (k == "images") cfg.images = detail::parse_bool(k, v);
    else if (k == "workers") {
      const int w = detail::parse_int(k, v);
      if (w < 1) throw std::invalid_argument("workers: must be >= 1");
      cfg.workers = static_cast<std::size_t>(w);
    } else throw std::invalid_argument("unknown config key: " + k);
  }
  return cfg;
}

inline RunConfig parse_config_text(std::string_view text, RunConfig base = {}) {
  return apply_config_keys(std::move(base), detail::parse_key_values(text));
}

inline void validate(const RunConfig& cfg) {
  if (cfg.scales) {
    if (cfg.scales->empty()) throw std::domain_error("RunConfig.scales: empty");
    for (std::size_t i = 0; i < cfg.scales->size(); ++i) {
      if (!((*cfg.scales)[i] > 0.0)) throw std::domain_error("RunConfig.scales: must be > 0");
      if (i > 0 && !((*cfg.scales)[i] > (*cfg.scales)[i - 1]))
        throw std::domain_error("RunConfig.scales: must be strictly increasing");
    }
  }
  if (!(cfg.scale_base > 0.0)) throw std::domain_error("RunConfig.scale_base: must be > 0");
  validate(DoGParams{8.0, cfg.surround_ratio, cfg.window_ratio});
  validate(cfg.hough);
  if (cfg.workers < 1) throw std::domain_error("RunConfig.workers: must be >= 1");
}

/// Every setting as "key = value" with a trailing note: "model" when the
/// value comes from the published model, "decision" when it fills a gap.
inline std::string print_config(const RunConfig& cfg) {
  std::ostringstream os;
  auto line = [&](const std::string& k, const std::string& v, const char* origin, const char* note = "") {
    os << k << " = " << v << "  # " << origin << (*note ? ": " : "") << note << '\n';
  };
  std::string stim;
  for (std::size_t i = 0; i < cfg.stimuli.size(); ++i) stim += (i ? "," : "") + cfg.stimuli[i];
  std::string specs;
  for (std::size_t i = 0; i < cfg.spec_files.size(); ++i) specs += (i ? "," : "") + cfg.spec_files[i].string();
  line("stimuli", stim.empty() && specs.empty() ? "fig4" : stim, "model", "fig4 = the 18-stimulus suite");
  if (!specs.empty()) line("spec_files", specs, "decision", "inline stimulus files");
  line("scales", cfg.scales ? detail::join_doubles(*cfg.scales) : "auto", "model",
       "auto = 0.5M..3.5M step 0.5M");
  line("scale_base", format_double(cfg.scale_base), "model", "M, canonical mortar width");
  line("surround_ratio", format_double(cfg.surround_ratio), "model");
  line("window_ratio", format_double(cfg.window_ratio), "model");
  line("border", "replicate", "decision", "convolution edge handling");
  line("binarize_epsilon", format_double(kResponseEpsilon), "decision", "foreground is response > epsilon");
  line("rho_step", format_double(cfg.hough.rho_step), "model");
  line("theta_step", format_double(cfg.hough.theta_step), "model");
  line("num_peaks", std::to_string(cfg.hough.num_peaks), "model");
  line("threshold_frac", format_double(cfg.hough.threshold_frac), "model", "peak threshold, fraction of max");
  line("nhood_rho", cfg.hough.nhood_rho ? std::to_string(cfg.hough.nhood_rho) : "auto", "model",
       "auto = smallest odd >= bins/50");
  line("nhood_theta", cfg.hough.nhood_theta ? std::to_string(cfg.hough.nhood_theta) : "auto", "model",
       "auto = smallest odd >= bins/50");
  line("fill_gap", format_double(cfg.hough.fill_gap), "model");
  line("min_length", format_double(cfg.hough.min_length), "model");
  line("assign_tolerance", cfg.hough.assign_tolerance < 0 ? "auto" : format_double(cfg.hough.assign_tolerance),
       "decision", "auto = rho_step/2 + 0.5 px");
  line("extended_scales", cfg.extended_scales ? "true" : "false", "model", "adds 32,40,48 for MW >= 32");
  line("mortar_correction", cfg.mortar_correction ? "true" : "false", "decision",
       "PMC correction for the mortar-width family only");
  line("out", cfg.out.string(), "decision");
  line("images", cfg.images ? "true" : "false", "decision");
  line("workers", std::to_string(cfg.workers), "decision");
  return os.str();
}

/// Named stimuli selected by the config, in a stable order.
inline std::vector<NamedStimulus> resolve_stimuli(const RunConfig& cfg) {
  const auto suite = fig4_suite();
  std::vector<NamedStimulus> out;
  if (cfg.stimuli.empty() && cfg.spec_files.empty()) return suite;
  for (const auto& name : cfg.stimuli) out.push_back(find_stimulus(suite, name));
  for (const auto& path : cfg.spec_files)
    out.push_back({path.stem().string(), Family::MortarLuminance, parse_spec_text(read_text(path))});
  return out;
}

/// Scale list for one stimulus: the configured or automatic list, plus the
/// coarse extension for very wide mortars when requested.
inline std::vector<double> scales_for(const NamedStimulus& s, const RunConfig& cfg) {
  std::vector<double> scales = cfg.scales ? *cfg.scales : default_scales(cfg.scale_base);
  if (cfg.extended_scales && s.family == Family::MortarWidth && s.spec.mortar_px >= 32)
    for (double e : extended_scales())
      if (e > scales.back()) scales.push_back(e);
  return scales;
}

inline ParameterRecord parameter_record(const NamedStimulus& s, const RunConfig& cfg) {
  ParameterRecord p;
  p.stimulus = s.spec;
  p.surround_ratio = cfg.surround_ratio;
  p.window_ratio = cfg.window_ratio;
  p.scales = scales_for(s, cfg);
  p.hough = cfg.hough;
  if (cfg.mortar_correction && s.family == Family::MortarWidth) p.mortar_correction = s.spec.mortar_px;
  return p;
}

/// In-memory result of one stimulus, before anything is written.
struct StimulusResult {
  RunReport report;
  EdgeMapStack stack;
  TiltAnalysis analysis;
};

/// Runs one stimulus through filter, line detection and feature extraction.
inline StimulusResult analyze(const std::string& name, const ParameterRecord& p, std::size_t workers = 1) {
  const ScalarField image = detail::in_stage("stimulus", name, [&] { return generate(p.stimulus); });
  DoGParams base{8.0, p.surround_ratio, p.window_ratio};
  StimulusResult r;
  r.stack = detail::in_stage("dogfilter", name,
                             [&] { return build_edge_map_stack(image, p.scales, base, p.stimulus, workers); });
  r.analysis = detail::in_stage("hough", name, [&] { return analyze_stack(r.stack, p.hough, workers); });
  r.report.name = name;
  r.report.spec = p.stimulus;
  r.report.params = p;
  r.report.table = r.analysis.table;
  r.report.features = detail::in_stage("tiltanalysis", name, [&] {
    if (!r.report.table.find(kFovealScale))
      throw std::domain_error("feature extraction needs sigma_c = 4 among the scales");
    return extract_features(r.report.table, p.mortar_correction);
  });
  return r;
}

/// Runs one stimulus and writes its artifacts under root/<slug>/.
inline RunReport run_stimulus(const NamedStimulus& s, const RunConfig& cfg, std::size_t workers = 1) {
  StimulusResult r = analyze(s.name, parameter_record(s, cfg), workers);
  const fs::path dir = cfg.out / slug(s.name);
  detail::in_stage("report", s.name, [&] {
    if (cfg.images) r.report.artifacts = write_scale_images(dir, r.stack, r.analysis);
    write_report_tables(dir, r.report);
    return 0;
  });
  return std::move(r.report);
}

/// Full batch: every selected stimulus, then the summary. Stimuli run
/// concurrently up to cfg.workers; a lone stimulus gets the workers for its
/// scales instead.
inline std::vector<RunReport> run(const RunConfig& cfg) {
  detail::in_stage("config", "", [&] {
    validate(cfg);
    return 0;
  });
  const auto stimuli = detail::in_stage("config", "", [&] { return resolve_stimuli(cfg); });
  for (const auto& s : stimuli) {
    // Catch oversize windows before any work starts.
    const auto scales = scales_for(s, cfg);
    detail::in_stage("config", s.name, [&] {
      const ScalarField probe(stimulus_width(s.spec), stimulus_height(s.spec));
      for (double sc : scales) check_scale_fits(probe, DoGParams{sc, cfg.surround_ratio, cfg.window_ratio});
      return 0;
    });
  }
  detail::in_stage("report", "", [&] {
    fs::create_directories(cfg.out);
    return 0;
  });
  std::vector<RunReport> reports(stimuli.size());
  const std::size_t inner = stimuli.size() == 1 ? cfg.workers : 1;
  parallel_for(stimuli.size(), cfg.workers,
               [&](std::size_t i) { reports[i] = run_stimulus(stimuli[i], cfg, inner); });
  detail::in_stage("report", "", [&] {
    write_summary(cfg.out, emit_summary(reports));
    return 0;
  });
  return reports;
}

/// Output root: explicit value, else $CAFEWALL_OUT, else "out".
inline fs::path default_output_root() {
  if (const char* env = std::getenv(kOutputEnvVar); env && *env) return env;
  return "out";
}

}  // namespace cafewall

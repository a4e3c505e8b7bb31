// Batch driver: generate stimuli, run the full pipeline, print the config.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "cafewall/cafewall.hpp"

using namespace cafewall;

namespace {

struct Flags {
  fs::path config;
  std::string suite;
  std::vector<std::string> stimuli;
  std::vector<std::string> specs;
  std::string scales;
  std::optional<double> threshold_frac;
  std::optional<double> fill_gap;
  std::optional<double> min_length;
  std::optional<int> num_peaks;
  std::optional<double> surround_ratio;
  std::optional<double> window_ratio;
  std::string out;
  bool extended = false;
  bool no_images = false;
  bool no_correction = false;
  std::optional<int> workers;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value config file; flags override it");
  cmd->add_option("--suite", f.suite, "named suite (fig4)");
  cmd->add_option("--stimulus", f.stimuli, "suite entry by name, repeatable")->delimiter(',');
  cmd->add_option("--spec", f.specs, "inline stimulus spec file, repeatable");
  cmd->add_option("--scales", f.scales, "comma-separated sigma_c list, or 'auto'");
  cmd->add_option("--threshold-frac", f.threshold_frac, "Hough peak threshold as a fraction of the maximum");
  cmd->add_option("--fill-gap", f.fill_gap, "largest gap bridged within a line, px");
  cmd->add_option("--min-length", f.min_length, "shortest line kept, px");
  cmd->add_option("--num-peaks", f.num_peaks, "Hough peaks per scale");
  cmd->add_option("--surround-ratio", f.surround_ratio, "sigma_surround / sigma_c");
  cmd->add_option("--window-ratio", f.window_ratio, "window = ratio * sigma_c + 1");
  cmd->add_option("--out", f.out, std::string("output root (default $") + kOutputEnvVar + " or ./out)");
  cmd->add_flag("--extended-scales", f.extended, "also analyze MW >= 32 at sigma_c 32, 40, 48");
  cmd->add_flag("--no-images", f.no_images, "skip PNG output");
  cmd->add_flag("--no-mortar-correction", f.no_correction, "report the raw PMC for the mortar-width family");
  cmd->add_option("--workers", f.workers, "parallel workers")->check(CLI::PositiveNumber);
}

RunConfig build_config(const Flags& f) {
  RunConfig cfg;
  cfg.out = default_output_root();
  if (!f.config.empty()) cfg = parse_config_text(read_text(f.config), cfg);
  if (!f.suite.empty()) {
    if (f.suite != "fig4") throw std::invalid_argument("unknown suite: " + f.suite);
    cfg.stimuli.clear();
    cfg.spec_files.clear();
  }
  if (!f.stimuli.empty() || !f.specs.empty()) {
    cfg.stimuli = f.stimuli;
    cfg.spec_files.assign(f.specs.begin(), f.specs.end());
  }
  if (!f.scales.empty()) {
    if (f.scales == "auto") cfg.scales.reset();
    else cfg.scales = parse_scale_list(f.scales);
  }
  if (f.threshold_frac) cfg.hough.threshold_frac = *f.threshold_frac;
  if (f.fill_gap) cfg.hough.fill_gap = *f.fill_gap;
  if (f.min_length) cfg.hough.min_length = *f.min_length;
  if (f.num_peaks) cfg.hough.num_peaks = *f.num_peaks;
  if (f.surround_ratio) cfg.surround_ratio = *f.surround_ratio;
  if (f.window_ratio) cfg.window_ratio = *f.window_ratio;
  if (!f.out.empty()) cfg.out = f.out;
  if (f.extended) cfg.extended_scales = true;
  if (f.no_images) cfg.images = false;
  if (f.no_correction) cfg.mortar_correction = false;
  if (f.workers) cfg.workers = static_cast<std::size_t>(*f.workers);
  return cfg;
}

int cmd_generate(const Flags& f) {
  const RunConfig cfg = build_config(f);
  const auto stimuli = detail::in_stage("config", "", [&] { return resolve_stimuli(cfg); });
  fs::create_directories(cfg.out);
  for (const auto& s : stimuli) {
    const ScalarField img = detail::in_stage("stimulus", s.name, [&] { return generate(s.spec); });
    const fs::path path = cfg.out / (slug(s.name) + ".png");
    detail::in_stage("report", s.name, [&] {
      write_png(path, img);
      return 0;
    });
    std::cout << path.string() << '\n';
  }
  return 0;
}

int cmd_run(const Flags& f) {
  const RunConfig cfg = detail::in_stage("config", "", [&] { return build_config(f); });
  const auto reports = run(cfg);
  std::cout << summary_table_text(emit_summary(reports));
  std::cout << "wrote " << (cfg.out / "summary.csv").string() << '\n';
  return 0;
}

int cmd_print_config(const Flags& f) {
  const RunConfig cfg = detail::in_stage("config", "", [&] { return build_config(f); });
  detail::in_stage("config", "", [&] {
    validate(cfg);
    return 0;
  });
  std::cout << print_config(cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cafe Wall tilt analysis: DoG edge maps, Hough lines, tilt features"};
  app.require_subcommand(1);
  Flags gen_flags, run_flags, cfg_flags;
  auto* gen = app.add_subcommand("generate", "write stimulus PNGs only");
  add_run_flags(gen, gen_flags);
  auto* runc = app.add_subcommand("run", "full pipeline with per-stimulus reports and a summary");
  add_run_flags(runc, run_flags);
  auto* pc = app.add_subcommand("print-config", "show the resolved configuration");
  add_run_flags(pc, cfg_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::BadInput);
  }

  try {
    if (*gen) return cmd_generate(gen_flags);
    if (*runc) return cmd_run(run_flags);
    return cmd_print_config(cfg_flags);
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return static_cast<int>(ExitCode::BadInput);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::RuntimeFailure);
  }
}

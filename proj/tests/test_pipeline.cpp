#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>

#include "cafewall/pipeline.hpp"

using namespace cafewall;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("cafewall_pipe_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Small wall that runs through the whole pipeline in well under a second.
fs::path small_spec(const fs::path& dir) {
  const fs::path p = dir / "small.txt";
  std::ofstream(p) << "rows = 3\ncols = 6\ntile_px = 40\nmortar_px = 2\n";
  return p;
}

int cli(const std::string& args, std::string* out = nullptr) {
  const fs::path log = fs::temp_directory_path() / ("cafewall_cli_" + std::to_string(::getpid()) + ".log");
  const std::string cmd = std::string("'") + CAFEWALL_CLI + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  if (out) *out = read_text(log);
  fs::remove(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsAreCanonical) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.surround_ratio, 2.0);
  EXPECT_EQ(cfg.window_ratio, 8.0);
  EXPECT_FALSE(cfg.scales);
  EXPECT_EQ(default_scales(cfg.scale_base), (std::vector<double>{4, 8, 12, 16, 20, 24, 28}));
  EXPECT_EQ(cfg.hough.num_peaks, 1000);
  EXPECT_EQ(cfg.hough.fill_gap, 40.0);
  EXPECT_EQ(cfg.hough.min_length, 450.0);
  EXPECT_EQ(resolve_stimuli(cfg).size(), 18u);
}

TEST(Config, ParseAndOverride) {
  const RunConfig cfg = parse_config_text(
      "# tweaks\nstimuli = ML=0.50, Shift=1/3\nscales = 4,8\nthreshold_frac = 0.3\nworkers = 2\n"
      "extended_scales = yes\n");
  EXPECT_EQ(cfg.stimuli, (std::vector<std::string>{"ML=0.50", "Shift=1/3"}));
  EXPECT_EQ(*cfg.scales, (std::vector<double>{4, 8}));
  EXPECT_EQ(cfg.hough.threshold_frac, 0.3);
  EXPECT_EQ(cfg.workers, 2u);
  EXPECT_TRUE(cfg.extended_scales);
  EXPECT_FALSE(parse_config_text("scales = auto\n", cfg).scales);
  EXPECT_THROW(parse_config_text("colour = blue\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_text("workers = 0\n"), std::invalid_argument);
  RunConfig bad;
  bad.scales = std::vector<double>{8, 4};
  EXPECT_THROW(validate(bad), std::domain_error);
}

TEST(Config, PrintMarksDecisions) {
  const std::string text = print_config(RunConfig{});
  EXPECT_NE(text.find("surround_ratio = 2  # model"), std::string::npos);
  EXPECT_NE(text.find("min_length = 450  # model"), std::string::npos);
  EXPECT_NE(text.find("border = replicate  # decision"), std::string::npos);
  EXPECT_NE(text.find("assign_tolerance = auto  # decision"), std::string::npos);
  EXPECT_NE(text.find("binarize_epsilon"), std::string::npos);
  // Round-trips through the config parser once comments are stripped.
  std::string reparsable;
  for (const char* key : {"scales", "surround_ratio", "window_ratio", "num_peaks", "threshold_frac", "fill_gap",
                          "min_length"}) {
    const auto at = text.find(std::string(key) + " = ");
    reparsable += text.substr(at, text.find('\n', at) - at) + "\n";
  }
  EXPECT_EQ(print_config(parse_config_text(reparsable)), text);
}

TEST(Config, PrintedConfigParsesBack) {
  RunConfig cfg;
  cfg.hough.threshold_frac = 0.3;
  cfg.stimuli = {"MW=4", "Shift=1/3"};
  cfg.workers = 3;
  for (const RunConfig& c : {RunConfig{}, cfg}) {
    const std::string text = print_config(c);
    EXPECT_EQ(print_config(parse_config_text(text)), text);
  }
  EXPECT_TRUE(parse_config_text(print_config(RunConfig{})).stimuli.empty());
  EXPECT_THROW(parse_config_text("border = zero\n"), std::invalid_argument);
  EXPECT_THROW(parse_config_text("binarize_epsilon = 0.01\n"), std::invalid_argument);
}

TEST(Config, ExtendedScalesOnlyForWideMortar) {
  RunConfig cfg;
  cfg.extended_scales = true;
  const auto suite = fig4_suite();
  EXPECT_EQ(scales_for(find_stimulus(suite, "MW=64"), cfg).size(), 10u);
  EXPECT_EQ(scales_for(find_stimulus(suite, "MW=32"), cfg).back(), 48.0);
  EXPECT_EQ(scales_for(find_stimulus(suite, "MW=16"), cfg).size(), 7u);
  EXPECT_EQ(scales_for(find_stimulus(suite, "ML=0.50"), cfg).size(), 7u);
}

TEST(Config, CorrectionOnlyForMortarWidthFamily) {
  const RunConfig cfg;
  const auto suite = fig4_suite();
  EXPECT_EQ(parameter_record(find_stimulus(suite, "MW=16"), cfg).mortar_correction, 16);
  EXPECT_FALSE(parameter_record(find_stimulus(suite, "ML=0.50"), cfg).mortar_correction);
}

TEST(Run, SmallStimulusEndToEnd) {
  const fs::path d = temp_dir("e2e");
  RunConfig cfg;
  cfg.spec_files = {small_spec(d)};
  cfg.scales = std::vector<double>{4, 8};
  cfg.hough.min_length = 100;
  cfg.out = d / "out";
  const auto reports = run(cfg);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].name, "small");
  EXPECT_EQ(reports[0].table.rows.size(), 2u);
  for (const char* f : {"binary.png", "response.png", "overlay.png"}) {
    EXPECT_TRUE(fs::exists(d / "out" / "small" / "sigma_4" / f)) << f;
    EXPECT_TRUE(fs::exists(d / "out" / "small" / "sigma_8" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(d / "out" / "small" / "tilts.csv"));
  EXPECT_TRUE(fs::exists(d / "out" / "summary.json"));

  // Same config twice gives byte-identical tables and images.
  const std::string csv = read_text(d / "out" / "small" / "tilts.csv");
  const std::string json = read_text(d / "out" / "small" / "tilts.json");
  const std::string png = read_text(d / "out" / "small" / "sigma_4" / "overlay.png");
  run(cfg);
  EXPECT_EQ(read_text(d / "out" / "small" / "tilts.csv"), csv);
  EXPECT_EQ(read_text(d / "out" / "small" / "tilts.json"), json);
  EXPECT_EQ(read_text(d / "out" / "small" / "sigma_4" / "overlay.png"), png);

  // The stored parameter record reproduces the numbers exactly.
  const RunReport stored = report_from_json(Json::parse(json));
  const StimulusResult again = analyze(stored.name, stored.params);
  EXPECT_EQ(again.report.table, stored.table);
  EXPECT_EQ(again.report.features, stored.features);
  fs::remove_all(d);
}

TEST(Run, StageErrors) {
  RunConfig cfg;
  cfg.stimuli = {"nope"};
  try {
    run(cfg);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.code(), ExitCode::BadInput);
    EXPECT_EQ(e.stage(), "config");
  }
  cfg.stimuli = {"ML=0.50"};
  cfg.scales = std::vector<double>{4, 90};
  try {
    run(cfg);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.code(), ExitCode::BadInput);
    EXPECT_NE(std::string(e.what()).find("window"), std::string::npos);
  }
  cfg.scales = std::vector<double>{8};
  cfg.out = temp_dir("stage");
  try {
    run(cfg);
    FAIL();
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "tiltanalysis");
  }
  fs::remove_all(cfg.out);
}

TEST(Cli, PrintConfig) {
  std::string out;
  EXPECT_EQ(cli("print-config", &out), 0);
  EXPECT_NE(out.find("# decision"), std::string::npos);
  EXPECT_NE(out.find("num_peaks = 1000"), std::string::npos);
  EXPECT_EQ(cli("print-config --threshold-frac 0.7", &out), 0);
  EXPECT_NE(out.find("threshold_frac = 0.7"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const fs::path d = temp_dir("cli");
  const std::string spec = small_spec(d).string();
  std::string out;
  EXPECT_EQ(cli("bogus-command", &out), 1);
  EXPECT_EQ(cli("run --stimulus nope --out '" + d.string() + "'", &out), 1);
  EXPECT_NE(out.find("config"), std::string::npos) << out;
  EXPECT_EQ(cli("run --spec '" + spec + "' --scales 4,64 --out '" + d.string() + "'", &out), 1);
  EXPECT_EQ(cli("run --spec '" + spec + "' --scales 4 --out /proc/cafewall_no_such_dir", &out), 2);
  EXPECT_NE(out.find("report"), std::string::npos) << out;
  EXPECT_EQ(cli("run --spec '" + spec + "' --scales 4,8 --min-length 100 --out '" + (d / "ok").string() + "'", &out),
            0)
      << out;
  EXPECT_TRUE(fs::exists(d / "ok" / "summary.csv"));
  EXPECT_TRUE(fs::exists(d / "ok" / "small" / "sigma_8" / "overlay.png"));
  fs::remove_all(d);
}

TEST(Cli, EnvironmentOutputRoot) {
  const fs::path d = temp_dir("env");
  const std::string spec = small_spec(d).string();
  const std::string env = std::string(kOutputEnvVar) + "='" + (d / "envout").string() + "' ";
  const std::string cmd = env + "'" + CAFEWALL_CLI + "' generate --spec '" + spec + "' > /dev/null 2>&1";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(d / "envout" / "small.png"));
  fs::remove_all(d);
}

TEST(Cli, SingleScaleCanonicalRun) {
  const fs::path d = temp_dir("single");
  std::string out;
  ASSERT_EQ(cli("run --stimulus ML=0.50 --scales 4 --no-images --out '" + d.string() + "'", &out), 0) << out;
  const RunReport r = report_from_json(Json::parse(read_text(d / "ML=0.50" / "tilts.json")));
  EXPECT_EQ(r.table.rows.size(), 1u);
  EXPECT_GT(r.features.fte, 0.0);
  EXPECT_NE(r.features.pmc, Pmc::None);
  fs::remove_all(d);
}

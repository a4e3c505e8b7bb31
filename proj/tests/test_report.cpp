#include <gtest/gtest.h>

#include <unistd.h>

#include <random>

#include "cafewall/render.hpp"
#include "cafewall/report.hpp"

using namespace cafewall;

namespace {

MeanTiltTable awkward_table() {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.0, 22.5);
  MeanTiltTable t;
  for (double s : {4.0, 8.0, 12.5, 16.0}) {
    ScaleRow r;
    r.sigma_c = s;
    for (int b = 0; b < 4; ++b) {
      if ((b + static_cast<int>(s)) % 3 == 0) continue;  // some empty buckets
      auto& st = r.buckets[b];
      st.n_lines = 1 + b;
      st.mean_abs_tilt = u(gen) / 3.0;  // non-terminating decimals
      if (st.n_lines >= 2) st.std_error = u(gen) / 7.0;
      st.mean_signed_tilt = -u(gen) / 11.0;
      st.n_positive = b;
      st.n_negative = 1;
    }
    t.rows.push_back(r);
  }
  return t;
}

RunReport report(std::string name, double fte, Strength s) {
  RunReport r;
  r.name = std::move(name);
  r.features.fte = fte;
  r.features.strength = s;
  return r;
}

fs::path temp_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("cafewall_test_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(TableIo, CsvRoundTripIsExact) {
  const MeanTiltTable t = awkward_table();
  EXPECT_EQ(table_from_csv(table_to_csv(t)), t);
}

TEST(TableIo, JsonRoundTripIsExact) {
  const MeanTiltTable t = awkward_table();
  EXPECT_EQ(table_from_json(Json::parse(table_to_json(t).dump())), t);
}

TEST(TableIo, EmptyCellsMeanNoLines) {
  const std::string csv = table_to_csv(awkward_table());
  EXPECT_NE(csv.find(",0,,,,0,0"), std::string::npos);
  EXPECT_THROW(table_from_csv("bogus\n"), std::invalid_argument);
}

TEST(FeaturesIo, RoundTrip) {
  TiltFeatures f;
  f.fte = 4.0 / 3.0;
  f.pmc = Pmc::MH;
  f.pmc_corrected = Pmc::M;
  f.sigma_star = 16.0;
  f.h_range = std::pair{4.0 / 3.0, 12.7};
  f.strength = Strength::Medium;
  EXPECT_EQ(features_from_json(Json::parse(features_to_json(f).dump())), f);
  EXPECT_EQ(features_from_json(features_to_json(TiltFeatures{})), TiltFeatures{});
}

TEST(ParamsIo, RoundTrip) {
  ParameterRecord p;
  p.stimulus.phase_shift = 1.0 / 3.0;
  p.scales = {4, 8, 12};
  p.hough.threshold_frac = 0.3;
  p.mortar_correction = 16;
  EXPECT_EQ(params_from_json(Json::parse(params_to_json(p).dump())), p);
  p.mortar_correction.reset();
  EXPECT_EQ(params_from_json(params_to_json(p)), p);
}

TEST(Summary, SortedByStrengthThenFte) {
  const auto rows = emit_summary({report("a", 4.5, Strength::MediumHigh), report("b", 0.0, Strength::NoIllusion),
                                  report("c", 3.4, Strength::Strong), report("d", 0.5, Strength::VeryWeak),
                                  report("e", 3.9, Strength::MediumHigh), report("f", 0.0, Strength::NoIllusion)});
  std::vector<std::string> names;
  for (const auto& r : rows) names.push_back(r.stimulus);
  EXPECT_EQ(names, (std::vector<std::string>{"b", "f", "d", "e", "a", "c"}));
  EXPECT_TRUE(emit_summary({}).empty());
}

TEST(Summary, CsvAndJsonRoundTrip) {
  auto reports = std::vector<RunReport>{report("GreyTiles ML=0.50", 4.0 / 3.0, Strength::Medium),
                                        report("odd, \"name\"", 0.0, Strength::NoIllusion)};
  reports[0].features.h_range = std::pair{1.0 / 3.0, 7.25};
  reports[0].features.pmc = Pmc::MH;
  reports[0].features.pmc_corrected = Pmc::M;
  const auto rows = emit_summary(reports);
  EXPECT_EQ(summary_from_csv(summary_to_csv(rows)), rows);
  EXPECT_EQ(summary_from_json(Json::parse(summary_to_json(rows).dump())), rows);
  EXPECT_EQ(summary_to_csv({}), std::string(kSummaryCsvHeader) + "\n");
}

TEST(Overlay, NoSegmentsIsBlackAndWhite) {
  BinaryImage b(20, 10);
  b.set(3, 4);
  const RgbImage img = render_overlay(b, {});
  EXPECT_EQ(img, render_binary(b));
  EXPECT_EQ(img.at(3, 4), kWhite);
  EXPECT_EQ(img.at(0, 0), kBlack);
}

TEST(Overlay, LongestIsBlueOthersGreen) {
  BinaryImage b(100, 50);
  b.set(90, 45);
  LineSegment shortl{{10, 10}, {40, 10}};
  shortl.length = 30;
  LineSegment longl{{10, 30}, {80, 30}};
  longl.length = 70;
  const RgbImage one = render_overlay(b, {shortl});
  EXPECT_EQ(one.at(20, 10), kBlue);
  const RgbImage img = render_overlay(b, {shortl, longl});
  EXPECT_EQ(img.at(20, 10), kGreen);
  EXPECT_EQ(img.at(50, 30), kBlue);
  // Pixels off the drawn lines keep their binary colour.
  const RgbImage base = render_binary(b);
  for (std::size_t y = 0; y < 50; ++y)
    for (std::size_t x = 0; x < 100; ++x)
      if (y != 10 && y != 30) ASSERT_EQ(img.at(x, y), base.at(x, y));
}

TEST(Colormap, ZeroIsWhite) {
  const RgbImage img = render_colormap(ScalarField(5, 5));
  for (std::size_t y = 0; y < 5; ++y)
    for (std::size_t x = 0; x < 5; ++x) EXPECT_EQ(img.at(x, y), kWhite);
}

TEST(Colormap, NegationSwapsWarmAndCool) {
  ScalarField f(7, 1);
  const double vals[] = {-1.0, -0.6, -0.1, 0.0, 0.2, 0.7, 1.0};
  for (int i = 0; i < 7; ++i) f(i, 0) = vals[i];
  ScalarField g = f;
  for (double& v : g.values()) v = -v;
  const RgbImage a = render_colormap(f), b = render_colormap(g);
  for (std::size_t x = 0; x < 7; ++x) {
    const Rgb p = a.at(x, 0), q = b.at(x, 0);
    EXPECT_EQ(p[0], q[2]);
    EXPECT_EQ(p[1], q[1]);
    EXPECT_EQ(p[2], q[0]);
  }
  EXPECT_GT(a.at(6, 0)[0], a.at(6, 0)[2]);  // positive end is warm
}

TEST(Png, RoundTrip) {
  const fs::path d = temp_dir("png");
  ScalarField f(9, 4);
  for (std::size_t i = 0; i < f.size(); ++i) f.values()[i] = (i % 5) / 4.0;
  write_png(d / "g.png", f);
  const ScalarField back = read_png_gray(d / "g.png");
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(back.values()[i], f.values()[i], 0.5 / 255.0);

  RgbImage rgb(3, 2, {10, 20, 30});
  rgb.set(1, 1, {200, 0, 7});
  write_png(d / "c.png", rgb);
  EXPECT_EQ(read_png_rgb(d / "c.png"), rgb);
  fs::remove_all(d);
}

TEST(Files, LayoutAndDeterminism) {
  const fs::path d = temp_dir("files");
  RunReport r = report("Shift=1/3", 3.5, Strength::Medium);
  r.table = awkward_table();
  write_report_tables(d / slug(r.name), r);
  const std::string first = read_text(d / "Shift=1_3" / "tilts.json");
  write_report_tables(d / slug(r.name), r);
  EXPECT_EQ(read_text(d / "Shift=1_3" / "tilts.json"), first);
  EXPECT_EQ(table_from_csv(read_text(d / "Shift=1_3" / "tilts.csv")), r.table);
  const RunReport back = report_from_json(Json::parse(first));
  EXPECT_EQ(back.table, r.table);
  EXPECT_EQ(back.features, r.features);
  write_summary(d, emit_summary({r}));
  EXPECT_TRUE(fs::exists(d / "summary.csv"));
  EXPECT_TRUE(fs::exists(d / "summary.json"));
  EXPECT_EQ(scale_dir(4.0), "sigma_4");
  fs::remove_all(d);
}

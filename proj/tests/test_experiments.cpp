#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "lspline/error.hpp"
#include "lspline/experiments.hpp"
#include "lspline/imageio.hpp"
#include "lspline/metrics.hpp"
#include "lspline/noise.hpp"

using namespace lspline;
namespace fs = std::filesystem;

namespace {

const std::vector<PenaltyKind> kAll = {PenaltyKind::Gradient, PenaltyKind::Mixed, PenaltyKind::Biharmonic};

Image smooth_image(std::size_t rows, std::size_t cols) {
  Image img(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      img.at(r, c) = 0.5 + 0.3 * std::sin(0.2 * static_cast<double>(c)) * std::cos(0.15 * static_cast<double>(r));
  return quantize_8bit(img);
}

std::string csv(const ExperimentReport& r) {
  std::ostringstream out;
  write_report_csv(out, r, false);
  return out.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lspline_exp_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(TestFunctions, Definitions) {
  const TestFunction f = test_function("f"), g = test_function("g");
  EXPECT_NEAR(f.eval(0.3, -0.4), std::sin(0.9) * std::exp(0.09 - 0.16), 1e-15);
  EXPECT_NEAR(g.eval(0.3, -0.4), -0.09 - 0.3 * 0.16, 1e-15);
  EXPECT_THROW(test_function("h"), InvalidArgument);
}

TEST(FunctionGrid, LevelsHalveSpacing) {
  for (int level = 0; level <= 5; ++level) {
    const Grid g = function_grid(level);
    EXPECT_NEAR(g.hx(), (2.0 / 19.0) / std::pow(2.0, level), 1e-15);
    EXPECT_EQ(g.nx(), (kBaseNodes - 1) * (std::size_t{1} << level) + 1);
  }
  EXPECT_THROW(function_grid(-1), InvalidArgument);
}

TEST(FunctionSamples, LevelZeroNodesWithNoise) {
  const TestFunction f = test_function("f");
  const DataSet clean = function_samples(f, 0.0, 3);
  const Grid g = function_grid(0);
  ASSERT_EQ(clean.size(), g.node_count());
  for (std::size_t k = 0; k < clean.size(); ++k) EXPECT_EQ(clean.values[k], f.eval(g.node(k).x, g.node(k).y));
  const DataSet a = function_samples(f, 0.05, 3), b = function_samples(f, 0.05, 3);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, function_samples(f, 0.05, 4).values);
}

TEST(ImageCorruption, MatchesNoisePipeline) {
  const Image clean = smooth_image(20, 24);
  const Image noisy = corrupt_image(clean, 0.05, 0.4, 9);
  EXPECT_EQ(noisy.pixels, corrupt_image(clean, 0.05, 0.4, 9).pixels);
  std::size_t extremes = 0;
  for (double v : noisy.pixels) extremes += (v == 0.0 || v == 1.0);
  EXPECT_GE(extremes, static_cast<std::size_t>(std::lround(0.4 * 480)));
  for (double v : quantize_8bit(noisy).pixels) EXPECT_EQ(v * 255.0, std::round(v * 255.0));
}

TEST(RecoverImage, ExcludesImpulsesAndBeatsNoise) {
  const Image clean = smooth_image(32, 32);
  const Image noisy = corrupt_image(clean, 0.01, 0.5, 2);
  const ImageRecovery rec = recover_image(noisy, PenaltyKind::Mixed, std::nullopt, StudyOptions::default_gcv());
  std::size_t expected = 0;
  for (auto m : detect_impulses(noisy.pixels)) expected += m == 0;
  EXPECT_EQ(rec.impulses, expected);
  ASSERT_TRUE(rec.selection.has_value());
  EXPECT_EQ(rec.lambda, rec.selection->lambda);
  EXPECT_GT(*psnr(clean.pixels, quantize_8bit(rec.image).pixels, 1.0),
            *psnr(clean.pixels, noisy.pixels, 1.0) + 5.0);
  const ImageRecovery fixed = recover_image(noisy, PenaltyKind::Mixed, 0.01, StudyOptions::default_gcv());
  EXPECT_EQ(fixed.lambda, 0.01);
  EXPECT_FALSE(fixed.selection.has_value());
}

TEST(ImageStudy, RowsOrderAndCleanInput) {
  const Image clean = smooth_image(16, 16);
  StudyOptions opt;
  opt.lambda = 1e-7;
  const ExperimentReport r = run_image_study(clean, 0.0, {0.0}, kAll, opt);
  ASSERT_EQ(r.rows.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(r.rows[k].kind, kAll[k]);
    EXPECT_EQ(r.rows[k].condition, "0.00");
    EXPECT_FALSE(r.rows[k].failed()) << r.rows[k].error;
    if (r.rows[k].psnr_db) EXPECT_GE(*r.rows[k].psnr_db, 60.0);
  }
}

TEST(ImageStudy, FailedCellIsCaptured) {
  // A binary image loses every pixel to the impulse detector.
  Image binary(8, 8);
  for (std::size_t i = 0; i < binary.size(); ++i) binary.pixels[i] = static_cast<double>(i % 2);
  StudyOptions opt;
  const ExperimentReport r = run_image_study(binary, 0.0, {0.0, 0.3}, {PenaltyKind::Mixed}, opt);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) EXPECT_TRUE(row.failed());
  const std::string text = csv(r);
  EXPECT_NE(text.find("image,mixed,0,0.00,"), std::string::npos) << text;
  EXPECT_NE(text.find(",failed,"), std::string::npos);
}

TEST(ImageStudy, PsnrRecomputesFromPersistedImages) {
  const Image clean = smooth_image(24, 20);
  StudyOptions opt;
  opt.output_dir = scratch("images");
  const ExperimentReport r = run_image_study(clean, 0.02, {0.3, 0.5}, kAll, opt);
  ASSERT_EQ(r.rows.size(), 6u);
  for (const auto& row : r.rows) {
    ASSERT_FALSE(row.failed()) << row.error;
    const Image back =
        read_image(opt.output_dir / ("image_" + std::string(to_string(row.kind)) + "_d" + row.condition + ".pgm"));
    EXPECT_NEAR(*psnr(clean.pixels, back.pixels, 1.0), *row.psnr_db, 1e-9);
  }
  fs::remove_all(opt.output_dir);
}

TEST(ImageStudy, ThreadsDoNotChangeBytes) {
  const Image clean = smooth_image(20, 20);
  StudyOptions serial;
  serial.seed = 5;
  StudyOptions threaded = serial;
  threaded.jobs = 3;
  EXPECT_EQ(csv(run_image_study(clean, 0.05, {0.3, 0.6}, kAll, serial)),
            csv(run_image_study(clean, 0.05, {0.3, 0.6}, kAll, threaded)));
}

TEST(FunctionStudy, CsvDeterministicAndShaped) {
  const TestFunction f = test_function("f");
  StudyOptions opt;
  opt.seed = 7;
  const ExperimentReport a = run_function_study(f, 0.05, {0, 1}, kAll, opt);
  const ExperimentReport b = run_function_study(f, 0.05, {0, 1}, kAll, opt);
  EXPECT_EQ(csv(a), csv(b));
  ASSERT_EQ(a.rows.size(), 6u);
  EXPECT_EQ(a.rows[0].experiment, "function-f");
  EXPECT_EQ(a.rows[0].condition, "0");
  EXPECT_EQ(a.rows[1].condition, "1");
  EXPECT_NEAR(a.rows[1].h, 1.0 / 19.0, 1e-15);
  std::istringstream in(csv(a));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "experiment,penalty,variance,condition,h,lambda,psnr_db,iters,seconds");
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
    EXPECT_EQ(line.back(), ',');
  }
  std::ostringstream timed;
  write_report_csv(timed, a, true);
  EXPECT_NE(timed.str(), csv(a));
}

TEST(FunctionStudy, PsnrRecomputesFromPersistedFields) {
  const TestFunction g = test_function("g");
  StudyOptions opt;
  opt.output_dir = scratch("fields");
  const ExperimentReport r = run_function_study(g, 0.05, {0, 1}, {PenaltyKind::Mixed, PenaltyKind::Biharmonic}, opt);
  const DataSet samples = function_samples(g, 0.05, opt.seed);
  std::vector<double> truth;
  double peak = 0.0;
  for (const Point& p : samples.points) {
    truth.push_back(g.eval(p.x, p.y));
    peak = std::max(peak, std::abs(truth.back()));
  }
  for (const auto& row : r.rows) {
    ASSERT_FALSE(row.failed()) << row.error;
    std::ifstream in(opt.output_dir / ("function-g_" + std::string(to_string(row.kind)) + "_L" + row.condition + ".csv"));
    ASSERT_TRUE(in);
    std::string line;
    std::getline(in, line);
    std::map<std::pair<double, double>, double> field;
    while (std::getline(in, line)) {
      double x, y, u;
      char c;
      std::istringstream(line) >> x >> c >> y >> c >> u;
      field[{x, y}] = u;
    }
    std::vector<double> est;
    for (const Point& p : samples.points) {
      const auto it = field.find({p.x, p.y});
      ASSERT_NE(it, field.end());
      est.push_back(it->second);
    }
    EXPECT_NEAR(*psnr(truth, est, peak), *row.psnr_db, 1e-9);
  }
  fs::remove_all(opt.output_dir);
}

TEST(FunctionStudy, NoiseFreeSpikeShrinksWithRefinement) {
  const TestFunction f = test_function("f");
  StudyOptions opt;
  opt.lambda = 1e-7;
  opt.resample_data = true;
  const ExperimentReport r = run_spike_study(f, 0.0, {0, 1, 2}, {PenaltyKind::Mixed}, opt);
  ASSERT_EQ(r.rows.size(), 3u);
  // Q1 interpolation error of f measured at the cell centres of each level.
  double last = 1e300;
  for (std::size_t k = 0; k < 3; ++k) {
    const Grid g = function_grid(static_cast<int>(k));
    double interp = 0.0;
    for (std::size_t j = 0; j + 1 < g.ny(); ++j)
      for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
        const double x0 = g.x(i), x1 = g.x(i + 1), y0 = g.y(j), y1 = g.y(j + 1);
        const double mean = 0.25 * (f.eval(x0, y0) + f.eval(x1, y0) + f.eval(x0, y1) + f.eval(x1, y1));
        interp = std::max(interp, std::abs(mean - f.eval(0.5 * (x0 + x1), 0.5 * (y0 + y1))));
      }
    EXPECT_LT(interp, last);
    last = interp;
    EXPECT_LE(r.rows[k].max_abs_error, interp);
  }
  std::ostringstream out;
  write_spike_csv(out, r);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "penalty,condition,h,max_abs_error,x,y");
}

TEST(FunctionStudy, InvalidLambdaFailsCell) {
  StudyOptions opt;
  opt.lambda = -1.0;
  const ExperimentReport r = run_function_study(test_function("g"), 0.05, {0}, {PenaltyKind::Mixed}, opt);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_TRUE(r.rows[0].failed());
}

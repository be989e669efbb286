#include "lspline/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "lspline/error.hpp"
#include "lspline/noise.hpp"
#include "lspline/random.hpp"

namespace lspline {

TestFunction test_function(std::string_view name) {
  if (name == "f")
    return {"f", [](double x, double y) { return std::sin(3.0 * x) * std::exp(x * x - y * y); }};
  if (name == "g") return {"g", [](double x, double y) { return -x * x - x * y * y; }};
  throw InvalidArgument("unknown test function '" + std::string(name) + "' (expected f or g)");
}

Grid function_grid(int level) {
  if (level < 0) throw InvalidArgument("refinement level must be >= 0");
  Grid g = make_symmetric_grid(kBaseNodes);
  for (int k = 0; k < level; ++k) g = refine(g);
  return g;
}

GcvConfig StudyOptions::default_gcv() {
  GcvConfig g;
  g.solver.preconditioner = Preconditioner::Auto;
  return g;
}

namespace {

constexpr std::uint64_t kImageNoiseStream = 0x696d;
constexpr std::uint64_t kFunctionNoiseStream = 0x666e;
constexpr std::uint64_t kProbeSeedStream = 0x6763;

using Clock = std::chrono::steady_clock;

struct Fit {
  SplineSolution solution;
  double lambda = 0.0;
};

Fit fit(const Grid& grid, const DataSet& data, PenaltyKind kind, const StudyOptions& options,
        std::uint64_t cell_seed) {
  const SmoothingSystem system(grid, data, kind, options.scheme);
  GcvConfig gcv = options.gcv;
  gcv.seed = hash_draw(options.seed, kProbeSeedStream, cell_seed);
  gcv.jobs = 1;
  const double lambda = options.lambda ? *options.lambda : select_lambda(system, gcv).lambda;
  return {solve(system, lambda, gcv.solver), lambda};
}

std::string format_density(double d) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << d;
  return s.str();
}

// Runs independent cells on a small pool; results keep the cell order.
std::vector<ReportRow> run_cells(const std::vector<std::function<ReportRow()>>& cells, int jobs) {
  std::vector<ReportRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) rows[k] = cells[k]();
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)),
                                                    cells.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

// Wraps a cell body with timing, failure capture and logging.
ReportRow guarded(ReportRow row, const StudyOptions& options, std::mutex& log_mutex,
                  const std::function<void(ReportRow&)>& body) {
  const auto start = Clock::now();
  try {
    body(row);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (options.log) {
    std::ostringstream msg;
    msg << row.experiment << ' ' << to_string(row.kind) << ' ' << row.condition << ": ";
    if (row.failed()) {
      msg << "FAILED (" << row.error << ")";
    } else {
      msg << "lambda=" << row.lambda << " psnr=";
      if (row.psnr_db) msg << *row.psnr_db;
      else msg << "inf";
      msg << " dB";
    }
    msg << " [" << row.seconds << " s]";
    std::lock_guard<std::mutex> lock(log_mutex);
    options.log(msg.str());
  }
  return row;
}

void ensure_output_dir(const StudyOptions& options) {
  if (options.output_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(options.output_dir, ec);
  if (ec) throw IoError("cannot create '" + options.output_dir.string() + "': " + ec.message());
}

}  // namespace

Image corrupt_image(const Image& clean, double variance, double density, std::uint64_t seed) {
  const auto key = static_cast<std::uint64_t>(std::llround(density * 1000.0));
  const NoiseSpec spec{variance, density, hash_draw(seed, kImageNoiseStream, key)};
  Image img(clean.rows, clean.cols);
  img.pixels = corrupt(clean.pixels, spec);
  return img;
}

Image quantize_8bit(const Image& image) {
  Image q = image;
  for (double& v : q.pixels) v = static_cast<double>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0;
  return q;
}

ImageRecovery recover_image(const Image& noisy, PenaltyKind kind, std::optional<double> lambda,
                            const GcvConfig& gcv, BiharmonicScheme scheme) {
  if (noisy.rows < 2 || noisy.cols < 2) throw InvalidArgument("image must be at least 2 x 2");
  const Grid grid = make_image_grid(noisy.rows, noisy.cols);
  DataSet data;
  data.points.resize(grid.node_count());
  for (std::size_t k = 0; k < data.points.size(); ++k) data.points[k] = grid.node(k);
  data.values = noisy.pixels;
  data.mask = detect_impulses(data.values);
  ImageRecovery out;
  out.impulses = static_cast<std::size_t>(std::count(data.mask.begin(), data.mask.end(), 0));
  const SmoothingSystem system(grid, data, kind, scheme);
  if (lambda) {
    out.lambda = *lambda;
  } else {
    out.selection = select_lambda(system, gcv);
    out.lambda = out.selection->lambda;
  }
  const SplineSolution solution = solve(system, out.lambda, gcv.solver);
  out.iterations = solution.iterations;
  out.image = nodes_to_image(solution.coefficients, noisy.rows, noisy.cols);
  return out;
}

ExperimentReport run_image_study(const Image& clean, double variance,
                                 const std::vector<double>& densities,
                                 const std::vector<PenaltyKind>& kinds,
                                 const StudyOptions& options) {
  if (clean.rows < 2 || clean.cols < 2) throw InvalidArgument("image must be at least 2 x 2");
  ensure_output_dir(options);
  const double h = make_image_grid(clean.rows, clean.cols).hx();

  // One corrupted image per density, shared by every penalty.
  std::vector<Image> noisy;
  for (double d : densities) noisy.push_back(corrupt_image(clean, variance, d, options.seed));

  std::mutex log_mutex;
  std::vector<std::function<ReportRow()>> cells;
  for (PenaltyKind kind : kinds) {
    for (std::size_t di = 0; di < densities.size(); ++di) {
      cells.emplace_back([&, kind, di] {
        ReportRow row;
        row.experiment = "image";
        row.kind = kind;
        row.variance = variance;
        row.condition = format_density(densities[di]);
        row.h = h;
        return guarded(row, options, log_mutex, [&](ReportRow& r) {
          GcvConfig gcv = options.gcv;
          gcv.seed = hash_draw(options.seed, kProbeSeedStream, di * 8 + static_cast<int>(kind));
          gcv.jobs = 1;
          const ImageRecovery rec = recover_image(noisy[di], kind, options.lambda, gcv, options.scheme);
          r.lambda = rec.lambda;
          r.iterations = rec.iterations;
          // Score what gets written.
          const Image recovered = quantize_8bit(rec.image);
          const QualityReport q = quality(clean.pixels, recovered.pixels, 1.0);
          r.psnr_db = q.psnr_db;
          r.max_abs_error = q.max_abs_error;
          if (!options.output_dir.empty())
            write_image(recovered, options.output_dir / ("image_" + std::string(to_string(kind)) +
                                                         "_d" + r.condition + ".pgm"));
        });
      });
    }
  }
  return {run_cells(cells, options.jobs)};
}

DataSet function_samples(const TestFunction& fn, double variance, std::uint64_t seed) {
  const Grid base = function_grid(0);
  DataSet data;
  for (std::size_t k = 0; k < base.node_count(); ++k) {
    const Point p = base.node(k);
    data.points.push_back(p);
    data.values.push_back(fn.eval(p.x, p.y));
  }
  data.values = add_gaussian(data.values, variance, hash_draw(seed, kFunctionNoiseStream, 0));
  data.mask.assign(data.points.size(), 1);
  return data;
}

namespace {

ExperimentReport run_refinement(const std::string& experiment, const TestFunction& fn,
                                double variance, const std::vector<int>& levels,
                                const std::vector<PenaltyKind>& kinds,
                                const StudyOptions& options) {
  ensure_output_dir(options);
  const DataSet base_data = function_samples(fn, variance, options.seed);
  std::vector<double> base_truth;
  for (const Point& p : base_data.points) base_truth.push_back(fn.eval(p.x, p.y));

  struct Level {
    int level;
    std::unique_ptr<Grid> grid;
    DataSet data;
    std::vector<double> truth;  // fn at the sample points
    double peak = 0.0;
  };
  std::vector<Level> prepared;
  for (int level : levels) {
    Level lv{level, std::make_unique<Grid>(function_grid(level)), {}, {}, 0.0};
    const Grid& g = *lv.grid;
    if (options.resample_data && level > 0) {
      for (std::size_t k = 0; k < g.node_count(); ++k) {
        const Point p = g.node(k);
        lv.data.points.push_back(p);
        lv.truth.push_back(fn.eval(p.x, p.y));
      }
      lv.data.values = add_gaussian(lv.truth, variance,
                                    hash_draw(options.seed, kFunctionNoiseStream,
                                              static_cast<std::uint64_t>(level)));
      lv.data.mask.assign(lv.data.points.size(), 1);
    } else {
      lv.data = base_data;
      lv.truth = base_truth;
    }
    for (double v : lv.truth) lv.peak = std::max(lv.peak, std::abs(v));
    prepared.push_back(std::move(lv));
  }

  std::mutex log_mutex;
  std::vector<std::function<ReportRow()>> cells;
  for (PenaltyKind kind : kinds) {
    for (const Level& lv : prepared) {
      cells.emplace_back([&, kind] {
        ReportRow row;
        row.experiment = experiment;
        row.kind = kind;
        row.variance = variance;
        row.condition = std::to_string(lv.level);
        row.h = lv.grid->hx();
        return guarded(row, options, log_mutex, [&](ReportRow& r) {
          const Fit f = fit(*lv.grid, lv.data, kind, options,
                            static_cast<std::uint64_t>(lv.level) * 8 + static_cast<int>(kind));
          r.lambda = f.lambda;
          r.iterations = f.solution.iterations;
          const Vector& u = f.solution.coefficients;
          const Vector at_samples = evaluate(f.solution, lv.data.points);
          r.psnr_db = psnr(lv.truth,
                           std::span<const double>(at_samples.data(), lv.truth.size()), lv.peak);
          const SpikeReport spike = spike_diagnostic(f.solution, fn.eval);
          r.max_abs_error = spike.max_abs_error;
          r.max_error_location = spike.location;
          if (!options.output_dir.empty())
            write_field_csv(options.output_dir / (experiment + "_" + std::string(to_string(kind)) +
                                                  "_L" + r.condition + ".csv"),
                            *lv.grid, u);
        });
      });
    }
  }
  return {run_cells(cells, options.jobs)};
}

}  // namespace

ExperimentReport run_function_study(const TestFunction& fn, double variance,
                                    const std::vector<int>& levels,
                                    const std::vector<PenaltyKind>& kinds,
                                    const StudyOptions& options) {
  return run_refinement("function-" + fn.name, fn, variance, levels, kinds, options);
}

ExperimentReport run_spike_study(const TestFunction& fn, double variance,
                                 const std::vector<int>& levels,
                                 const std::vector<PenaltyKind>& kinds,
                                 const StudyOptions& options) {
  return run_refinement("spike-" + fn.name, fn, variance, levels, kinds, options);
}

namespace {

std::string number(double v, int precision) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

}  // namespace

void write_report_csv(std::ostream& out, const ExperimentReport& report, bool include_timing) {
  out << "experiment,penalty,variance,condition,h,lambda,psnr_db,iters,seconds\n";
  for (const ReportRow& r : report.rows) {
    out << r.experiment << ',' << to_string(r.kind) << ',' << number(r.variance, 10) << ','
        << r.condition << ',' << number(r.h, 10) << ',';
    if (r.failed()) {
      out << ",failed,,";
    } else {
      out << number(r.lambda, 17) << ',' << (r.psnr_db ? number(*r.psnr_db, 17) : "inf") << ','
          << r.iterations << ',';
    }
    if (include_timing) out << number(r.seconds, 6);
    out << '\n';
  }
}

void write_spike_csv(std::ostream& out, const ExperimentReport& report) {
  out << "penalty,condition,h,max_abs_error,x,y\n";
  for (const ReportRow& r : report.rows) {
    if (r.failed()) continue;
    out << to_string(r.kind) << ',' << r.condition << ',' << number(r.h, 10) << ','
        << number(r.max_abs_error, 17) << ',' << number(r.max_error_location.x, 17) << ','
        << number(r.max_error_location.y, 17) << '\n';
  }
}

}  // namespace lspline

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lspline/error.hpp"
#include "lspline/experiments.hpp"
#include "lspline/gcv.hpp"
#include "lspline/imageio.hpp"
#include "lspline/noise.hpp"
#include "lspline/runtime.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lspline;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitSolver = 4;

// Settings shared by every subcommand.
struct Common {
  std::uint64_t seed = 1;
  int jobs = 1;
  bool verbose = false;
  double tol = 1e-10;
  int max_iter = 0;
  std::string preconditioner = "auto";
  std::string scheme = "thin-plate";
  double lambda_min = 1e-7;
  double lambda_max = 1e1;
  int lambda_count = 16;
  int probes = 10;
  int refine = 10;
  std::string lambda = "auto";
  std::string penalty = "mixed";
};

void add_common(CLI::App& app, Common& c, bool with_fit) {
  app.add_option("--seed", c.seed, "Noise and probe seed")->envname("LSPLINE_SEED");
  app.add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", c.verbose, "Print every effective setting");
  app.add_option("--tol", c.tol, "CG relative residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", c.max_iter, "CG iteration cap, 0 for 10 sqrt(n) + 1000");
  app.add_option("--preconditioner", c.preconditioner, "jacobi, cholesky, lowrank or auto");
  app.add_option("--scheme", c.scheme,
                 "Biharmonic discretization: thin-plate, recovered-hessian, lumped-laplacian");
  app.add_option("--lambda-min", c.lambda_min, "Smallest lambda of the GCV grid");
  app.add_option("--lambda-max", c.lambda_max, "Largest lambda of the GCV grid");
  app.add_option("--lambda-count", c.lambda_count, "GCV grid size");
  app.add_option("--probes", c.probes, "Hutchinson probe vectors");
  app.add_option("--refine", c.refine, "Golden-section steps after the grid scan, 0 disables");
  if (with_fit) {
    app.add_option("--penalty", c.penalty, "grad, mixed or biharm");
    app.add_option("--lambda", c.lambda, "auto (GCV) or a positive value");
  }
}

GcvConfig gcv_config(const Common& c) {
  GcvConfig g;
  g.lambdas = log_lambda_grid(c.lambda_min, c.lambda_max, c.lambda_count);
  g.probes = c.probes;
  g.seed = c.seed;
  g.refine_evaluations = c.refine;
  g.jobs = c.jobs;
  g.solver.tol = c.tol;
  g.solver.max_iter = c.max_iter;
  g.solver.preconditioner = parse_preconditioner(c.preconditioner);
  g.validate();
  return g;
}

std::optional<double> parse_lambda(const std::string& text) {
  if (text == "auto") return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v > 0.0))
    throw InvalidArgument("--lambda must be 'auto' or a positive number, got '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* flag) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      throw InvalidArgument(std::string(flag) + ": '" + item + "' is not a number");
  }
  if (expected != 0 && out.size() != expected) {
    std::ostringstream msg;
    msg << flag << " expects " << expected << " comma-separated values";
    throw InvalidArgument(msg.str());
  }
  return out;
}

void print_settings(const Common& c, std::ostream& out) {
  out << "seed=" << c.seed << " jobs=" << c.jobs << '\n'
      << "solver: tol=" << c.tol << " max_iter=" << c.max_iter
      << (c.max_iter == 0 ? " (10 sqrt(n) + 1000)" : "") << " preconditioner=" << c.preconditioner
      << '\n'
      << "gcv: lambda grid [" << c.lambda_min << ", " << c.lambda_max << "] x " << c.lambda_count
      << " log-spaced, probes=" << c.probes << ", golden-section steps=" << c.refine << '\n'
      << "penalty=" << c.penalty << " lambda=" << c.lambda << " biharmonic scheme=" << c.scheme
      << '\n';
}

// "-" or empty selects stdout.
class Output {
public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw IoError("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void finish(const std::string& path) {
    stream().flush();
    if (!stream()) throw IoError("write to '" + (path.empty() ? "-" : path) + "' failed");
  }

private:
  std::ofstream file_;
};

Grid parse_grid(const std::string& grid_text, const std::string& domain_text, const DataSet& data) {
  const std::vector<double> n = parse_list(grid_text, 2, "--grid");
  if (n[0] < 2 || n[1] < 2 || n[0] != std::floor(n[0]) || n[1] != std::floor(n[1]))
    throw InvalidArgument("--grid needs two integers >= 2");
  Domain2 d;
  if (!domain_text.empty()) {
    const std::vector<double> b = parse_list(domain_text, 4, "--domain");
    d = {b[0], b[1], b[2], b[3]};
  } else {
    if (data.size() == 0) throw EmptyData("no data points and no --domain");
    d = {data.points[0].x, data.points[0].x, data.points[0].y, data.points[0].y};
    for (const Point& p : data.points) {
      d.x_min = std::min(d.x_min, p.x);
      d.x_max = std::max(d.x_max, p.x);
      d.y_min = std::min(d.y_min, p.y);
      d.y_max = std::max(d.y_max, p.y);
    }
  }
  return Grid(d, static_cast<std::size_t>(n[0]), static_cast<std::size_t>(n[1]));
}

int run_denoise(const Common& c, const std::string& input, const std::string& output,
                const std::string& noise, const std::string& reference_path) {
  const PenaltyKind kind = parse_penalty(c.penalty);
  const std::optional<double> lambda = parse_lambda(c.lambda);
  const GcvConfig gcv = gcv_config(c);
  const BiharmonicScheme scheme = parse_biharmonic_scheme(c.scheme);
  std::optional<std::vector<double>> added;
  if (!noise.empty()) added = parse_list(noise, 2, "--add-noise");
  if (c.verbose) print_settings(c, std::cerr);

  const Image source = read_image(input);
  std::optional<Image> reference;
  if (!reference_path.empty()) reference = read_image(reference_path);
  Image noisy = source;
  if (added) {
    noisy = corrupt_image(source, (*added)[0], (*added)[1], c.seed);
    if (!reference) reference = source;
  }
  if (reference && (reference->rows != source.rows || reference->cols != source.cols))
    throw ShapeMismatch("--reference size differs from --input");

  const ImageRecovery rec = recover_image(noisy, kind, lambda, gcv, scheme);
  const Image result = quantize_8bit(rec.image);
  write_image(result, output);
  std::cout.precision(17);
  std::cout << "lambda=" << rec.lambda << '\n';
  if (c.verbose)
    std::cerr << "impulse pixels excluded: " << rec.impulses << ", CG iterations: "
              << rec.iterations << '\n';
  if (reference) {
    const auto db = psnr(reference->pixels, result.pixels, 1.0);
    std::cout << "psnr_db=" << (db ? std::to_string(*db) : "inf") << '\n';
    if (added) {
      const auto before = psnr(reference->pixels, noisy.pixels, 1.0);
      std::cout << "noisy_psnr_db=" << (before ? std::to_string(*before) : "inf") << '\n';
    }
  }
  return kExitOk;
}

int run_smooth(const Common& c, const std::string& points, const std::string& grid_text,
               const std::string& domain_text, const std::string& output,
               const std::string& eval_path, const std::string& eval_output) {
  const PenaltyKind kind = parse_penalty(c.penalty);
  const std::optional<double> lambda = parse_lambda(c.lambda);
  const GcvConfig gcv = gcv_config(c);
  const BiharmonicScheme scheme = parse_biharmonic_scheme(c.scheme);
  const bool field_to_stdout = output.empty() || output == "-";
  const bool eval_to_stdout = eval_output.empty() || eval_output == "-";
  if (!eval_path.empty() && field_to_stdout && eval_to_stdout)
    throw InvalidArgument("--eval needs --output or --eval-output so the two CSVs stay apart");
  if (c.verbose) print_settings(c, std::cerr);

  const DataSet data = read_points_csv(points);
  if (data.size() == 0) throw EmptyData("'" + points + "' holds no data points");
  std::vector<Point> extra;
  if (!eval_path.empty()) extra = read_eval_points_csv(eval_path);
  const Grid grid = parse_grid(grid_text, domain_text, data);

  const SmoothingSystem system(grid, data, kind, scheme);
  const double lam = lambda ? *lambda : select_lambda(system, gcv).lambda;
  const SplineSolution solution = solve(system, lam, gcv.solver);
  std::cerr.precision(17);
  std::cerr << "lambda=" << lam << '\n';

  Output field(output);
  write_field_csv(field.stream(), grid, solution.coefficients);
  field.finish(output);
  if (!eval_path.empty()) {
    Output ev(eval_output);
    write_values_csv(ev.stream(), extra, evaluate(solution, extra));
    ev.finish(eval_output);
  }
  return kExitOk;
}

int run_gcv_scan(const Common& c, const std::string& points, const std::string& grid_text,
                 const std::string& domain_text, const std::string& input,
                 const std::string& noise, const std::string& fn_name, int level,
                 double variance, const std::string& output) {
  const PenaltyKind kind = parse_penalty(c.penalty);
  const GcvConfig gcv = gcv_config(c);
  const BiharmonicScheme scheme = parse_biharmonic_scheme(c.scheme);
  const int sources = !points.empty() + !input.empty() + !fn_name.empty();
  if (sources != 1) throw InvalidArgument("gcv-scan needs exactly one of --points, --input, --fn");
  std::optional<std::vector<double>> added;
  if (!noise.empty()) added = parse_list(noise, 2, "--add-noise");
  if (c.verbose) print_settings(c, std::cerr);

  std::optional<Grid> grid;
  DataSet data;
  if (!points.empty()) {
    data = read_points_csv(points);
    if (data.size() == 0) throw EmptyData("'" + points + "' holds no data points");
    grid = parse_grid(grid_text, domain_text, data);
  } else if (!input.empty()) {
    Image img = read_image(input);
    if (added) img = corrupt_image(img, (*added)[0], (*added)[1], c.seed);
    grid = make_image_grid(img.rows, img.cols);
    data.points.resize(grid->node_count());
    for (std::size_t k = 0; k < data.points.size(); ++k) data.points[k] = grid->node(k);
    data.values = img.pixels;
    data.mask = detect_impulses(data.values);
  } else {
    data = function_samples(test_function(fn_name), variance, c.seed);
    grid = function_grid(level);
  }

  const SmoothingSystem system(*grid, data, kind, scheme);
  const GcvSelection sel = select_lambda(system, gcv);
  Output out(output);
  write_gcv_csv(out.stream(), sel);
  out.finish(output);
  return kExitOk;
}

struct ReproduceArgs {
  std::string study;
  std::string config;
  std::string fn = "f";
  std::string input;
  std::string output;
  std::string spike_output;
  std::string fields_dir;
  std::string kinds;
  std::string levels;
  std::string densities;
  std::optional<double> variance;
  bool resample = false;
  bool timing = false;
};

std::vector<PenaltyKind> parse_kinds(const std::string& text) {
  std::vector<PenaltyKind> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_penalty(item));
  if (out.empty()) throw InvalidArgument("--kinds is empty");
  return out;
}

std::string join(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  std::string s;
  for (const auto& item : v) {
    if (!s.empty()) s += ',';
    if (item.is_string()) {
      s += item.get<std::string>();
    } else {
      std::ostringstream num;
      num.precision(17);
      num << item.get<double>();
      s += num.str();
    }
  }
  return s;
}

// Config keys fill in whatever the command line left unset.
void apply_config(const std::string& path, const CLI::App& app, Common& c, ReproduceArgs& r) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config '" + path + "' must hold a JSON object");
  const auto unset = [&](const char* flag) { return app.count(flag) == 0; };
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "study") { if (unset("--study")) r.study = value.get<std::string>(); }
      else if (key == "fn") { if (unset("--fn")) r.fn = value.get<std::string>(); }
      else if (key == "input") { if (unset("--input")) r.input = value.get<std::string>(); }
      else if (key == "output") { if (unset("--output")) r.output = value.get<std::string>(); }
      else if (key == "spike_output") { if (unset("--spike-output")) r.spike_output = value.get<std::string>(); }
      else if (key == "fields_dir") { if (unset("--fields-dir")) r.fields_dir = value.get<std::string>(); }
      else if (key == "kinds") { if (unset("--kinds")) r.kinds = join(value); }
      else if (key == "levels") { if (unset("--levels")) r.levels = join(value); }
      else if (key == "densities") { if (unset("--densities")) r.densities = join(value); }
      else if (key == "variance") { if (unset("--variance")) r.variance = value.get<double>(); }
      else if (key == "resample_data") { if (unset("--resample-data")) r.resample = value.get<bool>(); }
      else if (key == "timing") { if (unset("--timing")) r.timing = value.get<bool>(); }
      else if (key == "seed") { if (unset("--seed") && !std::getenv("LSPLINE_SEED")) c.seed = value.get<std::uint64_t>(); }
      else if (key == "jobs") { if (unset("--jobs")) c.jobs = value.get<int>(); }
      else if (key == "tol") { if (unset("--tol")) c.tol = value.get<double>(); }
      else if (key == "max_iter") { if (unset("--max-iter")) c.max_iter = value.get<int>(); }
      else if (key == "preconditioner") { if (unset("--preconditioner")) c.preconditioner = value.get<std::string>(); }
      else if (key == "scheme") { if (unset("--scheme")) c.scheme = value.get<std::string>(); }
      else if (key == "lambda_min") { if (unset("--lambda-min")) c.lambda_min = value.get<double>(); }
      else if (key == "lambda_max") { if (unset("--lambda-max")) c.lambda_max = value.get<double>(); }
      else if (key == "lambda_count") { if (unset("--lambda-count")) c.lambda_count = value.get<int>(); }
      else if (key == "probes") { if (unset("--probes")) c.probes = value.get<int>(); }
      else if (key == "refine") { if (unset("--refine")) c.refine = value.get<int>(); }
      else if (key == "lambda") {
        if (unset("--lambda"))
          c.lambda = value.is_string() ? value.get<std::string>() : join(json::array({value}));
      }
      else throw InvalidArgument("config '" + path + "': unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw InvalidArgument("config '" + path + "': " + e.what());
  }
}

int run_reproduce(const CLI::App& app, Common c, ReproduceArgs r) {
  if (!r.config.empty()) apply_config(r.config, app, c, r);
  if (r.study != "image" && r.study != "function" && r.study != "spike")
    throw InvalidArgument("--study must be image, function or spike");
  const std::optional<double> lambda = parse_lambda(c.lambda);
  StudyOptions opts;
  opts.seed = c.seed;
  opts.lambda = lambda;
  opts.gcv = gcv_config(c);
  opts.gcv.jobs = 1;
  opts.jobs = c.jobs;
  opts.scheme = parse_biharmonic_scheme(c.scheme);
  opts.resample_data = r.resample;
  if (!r.fields_dir.empty()) opts.output_dir = r.fields_dir;
  if (c.verbose) {
    opts.log = [](const std::string& line) { std::cerr << line << '\n'; };
    print_settings(c, std::cerr);
  }
  const double variance = r.variance.value_or(0.05);
  if (!(variance >= 0.0)) throw InvalidArgument("--variance must be >= 0");

  std::vector<PenaltyKind> kinds;
  if (!r.kinds.empty()) kinds = parse_kinds(r.kinds);
  else if (r.study == "spike") kinds = {PenaltyKind::Gradient, PenaltyKind::Mixed};
  else kinds = {PenaltyKind::Gradient, PenaltyKind::Mixed, PenaltyKind::Biharmonic};

  ExperimentReport report;
  if (r.study == "image") {
    if (r.input.empty()) throw InvalidArgument("--study image needs --input");
    std::vector<double> densities{0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
    if (!r.densities.empty()) densities = parse_list(r.densities, 0, "--densities");
    for (double d : densities)
      if (!(d >= 0.0 && d <= 1.0)) throw InvalidArgument("--densities must lie in [0, 1]");
    if (c.verbose) std::cerr << "variance=" << variance << '\n';
    const Image clean = read_image(r.input);
    report = run_image_study(clean, variance, densities, kinds, opts);
  } else {
    std::vector<int> levels{0, 1, 2, 3, 4, 5};
    if (!r.levels.empty()) {
      levels.clear();
      for (double v : parse_list(r.levels, 0, "--levels")) {
        if (v < 0 || v != std::floor(v)) throw InvalidArgument("--levels must be integers >= 0");
        levels.push_back(static_cast<int>(v));
      }
    }
    const TestFunction fn = test_function(r.fn);
    if (c.verbose) std::cerr << "fn=" << r.fn << " variance=" << variance << '\n';
    report = r.study == "function" ? run_function_study(fn, variance, levels, kinds, opts)
                                   : run_spike_study(fn, variance, levels, kinds, opts);
  }

  Output out(r.output);
  write_report_csv(out.stream(), report, r.timing);
  out.finish(r.output);
  if (r.study == "spike") {
    std::string sidecar = r.spike_output;
    if (sidecar.empty() && !r.output.empty() && r.output != "-")
      sidecar = fs::path(r.output).replace_extension(".spike.csv").string();
    if (!sidecar.empty()) {
      Output side(sidecar);
      write_spike_csv(side.stream(), report);
      side.finish(sidecar);
    } else {
      write_spike_csv(std::cerr, report);
    }
  }
  for (const ReportRow& row : report.rows)
    if (row.failed()) return kExitSolver;
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const CsvError*>(&e)) return kExitUsage;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const OutOfDomain*>(&e) ||
      dynamic_cast<const EmptyData*>(&e))
    return kExitUsage;
  if (dynamic_cast<const Error*>(&e)) return kExitSolver;
  return kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  ensure_working_blas(argv);

  CLI::App app{"Penalized least-squares splines on tensor grids: smoothing, denoising, GCV."};
  app.require_subcommand(1);

  Common denoise_c, smooth_c, scan_c, repro_c;
  std::string input, output, noise, reference;
  auto* denoise = app.add_subcommand("denoise", "Recover an image from noisy pixels");
  add_common(*denoise, denoise_c, true);
  denoise->add_option("--input", input, "PGM or grayscale PNG")->required();
  denoise->add_option("--output", output, "Recovered image, .png or PGM")->required();
  denoise->add_option("--add-noise", noise, "variance,density applied to the input first");
  denoise->add_option("--reference", reference, "Clean image for the PSNR report");

  std::string points, grid_text, domain_text, eval_path, eval_output;
  auto* smooth = app.add_subcommand("smooth", "Fit scattered x,y,z data on a grid");
  add_common(*smooth, smooth_c, true);
  smooth->add_option("--points", points, "CSV with header x,y,z")->required();
  smooth->add_option("--grid", grid_text, "nx,ny")->required();
  smooth->add_option("--domain", domain_text, "x0,x1,y0,y1; default is the data bounding box");
  smooth->add_option("--output", output, "Node values CSV, - for stdout");
  smooth->add_option("--eval", eval_path, "CSV of x,y points to evaluate the fit at");
  smooth->add_option("--eval-output", eval_output, "Where the --eval values go, - for stdout");

  std::string scan_points, scan_grid, scan_domain, scan_input, scan_noise, scan_fn, scan_output;
  int scan_level = 0;
  double scan_variance = 0.05;
  auto* scan = app.add_subcommand("gcv-scan", "Write the GCV curve over the lambda grid");
  add_common(*scan, scan_c, false);
  scan->add_option("--penalty", scan_c.penalty, "grad, mixed or biharm");
  scan->add_option("--points", scan_points, "CSV with header x,y,z");
  scan->add_option("--grid", scan_grid, "nx,ny for --points");
  scan->add_option("--domain", scan_domain, "x0,x1,y0,y1 for --points");
  scan->add_option("--input", scan_input, "Image whose pixels are the data");
  scan->add_option("--add-noise", scan_noise, "variance,density for --input");
  scan->add_option("--fn", scan_fn, "Test function samples: f or g");
  scan->add_option("--level", scan_level, "Refinement level for --fn")->check(CLI::NonNegativeNumber);
  scan->add_option("--variance", scan_variance, "Noise variance for --fn");
  scan->add_option("--output", scan_output, "GCV CSV, - for stdout");

  ReproduceArgs repro;
  double repro_variance = 0.0;
  auto* reproduce = app.add_subcommand("reproduce", "Run an image, function or spike study");
  add_common(*reproduce, repro_c, false);
  reproduce->add_option("--lambda", repro_c.lambda, "auto (GCV) or one lambda for every cell");
  reproduce->add_option("--study", repro.study, "image, function or spike");
  reproduce->add_option("--config", repro.config, "JSON object of defaults for these flags");
  reproduce->add_option("--fn", repro.fn, "f or g");
  reproduce->add_option("--input", repro.input, "Clean image for --study image");
  reproduce->add_option("--variance", repro_variance, "Gaussian noise variance (0.05)");
  reproduce->add_option("--densities", repro.densities, "Impulse densities (0.3,...,0.8)");
  reproduce->add_option("--levels", repro.levels, "Refinement levels (0,...,5)");
  reproduce->add_option("--kinds", repro.kinds, "Penalties, e.g. grad,mixed,biharm");
  reproduce->add_flag("--resample-data", repro.resample, "Fresh noisy samples at every level's nodes");
  reproduce->add_option("--output", repro.output, "Report CSV, - for stdout");
  reproduce->add_option("--spike-output", repro.spike_output,
                        "Spike diagnostic CSV; default is --output with extension .spike.csv");
  reproduce->add_option("--fields-dir", repro.fields_dir, "Directory for recovered fields");
  reproduce->add_flag("--timing", repro.timing, "Fill the seconds column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*denoise) return run_denoise(denoise_c, input, output, noise, reference);
    if (*smooth)
      return run_smooth(smooth_c, points, grid_text, domain_text, output, eval_path, eval_output);
    if (*scan)
      return run_gcv_scan(scan_c, scan_points, scan_grid, scan_domain, scan_input, scan_noise,
                          scan_fn, scan_level, scan_variance, scan_output);
    if (reproduce->count("--variance")) repro.variance = repro_variance;
    if (repro.study.empty() && repro.config.empty()) {
      std::cerr << "error: reproduce needs --study or --config\n\n" << reproduce->help();
      return kExitUsage;
    }
    return run_reproduce(*reproduce, repro_c, repro);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

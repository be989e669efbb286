#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lspline/gcv.hpp"
#include "lspline/imageio.hpp"
#include "lspline/metrics.hpp"

namespace lspline {

struct TestFunction {
  std::string name;
  ScalarField eval;
};

/// "f": sin(3x) exp(x^2 - y^2); "g": -x^2 - x y^2. Throws InvalidArgument.
TestFunction test_function(std::string_view name);

/// Nodes per axis of the level-0 grid on [-1, 1]^2 (h = 2/19).
inline constexpr std::size_t kBaseNodes = 20;

/// make_symmetric_grid(kBaseNodes) refined `level` times.
Grid function_grid(int level);

/// fn at the level-0 nodes plus N(0, variance) noise drawn from seed. The
/// function study fits every level to these samples.
DataSet function_samples(const TestFunction& fn, double variance, std::uint64_t seed);

struct ReportRow {
  std::string experiment;
  PenaltyKind kind = PenaltyKind::Mixed;
  double variance = 0.0;
  std::string condition;  // impulse density or refinement level
  double h = 0.0;
  double lambda = 0.0;
  std::optional<double> psnr_db;  // nullopt with an empty error means +infinity
  int iterations = 0;
  double seconds = 0.0;
  double max_abs_error = 0.0;
  Point max_error_location;
  std::string error;  // non-empty marks a failed cell

  bool failed() const { return !error.empty(); }
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
};

struct StudyOptions {
  std::uint64_t seed = 1;
  /// Fixed lambda for every cell instead of GCV selection.
  std::optional<double> lambda;
  GcvConfig gcv = default_gcv();
  /// Concurrent cells; 1 is the deterministic reference and the row order
  /// never depends on it.
  int jobs = 1;
  BiharmonicScheme scheme = BiharmonicScheme::ThinPlate;
  /// Function study: draw fresh noisy samples at the nodes of every level
  /// instead of keeping the level-0 samples.
  bool resample_data = false;
  /// When set, recovered images (PGM) or node fields (CSV) are written here.
  std::filesystem::path output_dir;
  std::function<void(const std::string&)> log;

  static GcvConfig default_gcv();
};

/// The corrupted image the image study uses for this density and seed.
Image corrupt_image(const Image& clean, double variance, double density, std::uint64_t seed);

/// Clamped to [0, 1] and rounded to the nearest 8-bit level, as written.
Image quantize_8bit(const Image& image);

struct ImageRecovery {
  Image image;  // raw spline node values
  double lambda = 0.0;
  int iterations = 0;
  std::size_t impulses = 0;  // pixels excluded from the data term
  std::optional<GcvSelection> selection;
};

/// Drops detected impulse pixels from the data term, selects lambda by GCV
/// unless one is given, and fits on the image grid.
ImageRecovery recover_image(const Image& noisy, PenaltyKind kind, std::optional<double> lambda,
                            const GcvConfig& gcv,
                            BiharmonicScheme scheme = BiharmonicScheme::ThinPlate);

/// Per density: corrupt, detect impulses, select lambda, solve, PSNR with
/// MAX = 1 against the clean image after 8-bit quantization of the result.
ExperimentReport run_image_study(const Image& clean, double variance,
                                 const std::vector<double>& densities,
                                 const std::vector<PenaltyKind>& kinds,
                                 const StudyOptions& options);

/// Noisy samples of fn at the level-0 nodes, fitted on refined grids. PSNR
/// is taken at the sample points with MAX = max |fn| over them.
ExperimentReport run_function_study(const TestFunction& fn, double variance,
                                    const std::vector<int>& levels,
                                    const std::vector<PenaltyKind>& kinds,
                                    const StudyOptions& options);

/// Function study restricted to the given kinds with the spike diagnostic
/// recorded per row; node fields are exported when output_dir is set.
ExperimentReport run_spike_study(const TestFunction& fn, double variance,
                                 const std::vector<int>& levels,
                                 const std::vector<PenaltyKind>& kinds,
                                 const StudyOptions& options);

/// experiment,penalty,variance,condition,h,lambda,psnr_db,iters,seconds.
/// The seconds column stays empty unless include_timing is set, so serial
/// runs produce identical bytes.
void write_report_csv(std::ostream& out, const ExperimentReport& report, bool include_timing);

/// penalty,condition,h,max_abs_error,x,y
void write_spike_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace lspline

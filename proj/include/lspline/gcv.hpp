#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lspline/system.hpp"

namespace lspline {

/// count values log-spaced from lo to hi inclusive.
std::vector<double> log_lambda_grid(double lo, double hi, int count);

struct GcvConfig {
  std::vector<double> lambdas = log_lambda_grid(1e-7, 1e1, 16);
  int probes = 10;
  std::uint64_t seed = 0;
  SolverOptions solver;
  /// Golden-section evaluations after the grid argmin; 0 disables.
  int refine_evaluations = 10;
  /// Worker threads for the grid scan. Results do not depend on it.
  int jobs = 1;

  /// Throws InvalidArgument.
  void validate() const;
};

struct TraceEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(probes); 0 for one probe
};

struct GcvRecord {
  double lambda = 0.0;
  double residual_sq = 0.0;
  double trace_estimate = 0.0;
  double trace_std_error = 0.0;
  double gcv = 0.0;
  /// Set when trace >= N; gcv is then NaN.
  bool degenerate = false;
};

struct GcvSelection {
  double lambda = 0.0;
  GcvRecord best;
  std::vector<GcvRecord> curve;       // one record per grid value, in grid order
  std::vector<GcvRecord> refinement;  // golden-section evaluations, in evaluation order
};

/// Hutchinson estimate of trace(A H^-1 A^T) with Rademacher probes. Probe k,
/// entry i is a pure function of (seed, k, i).
TraceEstimate influence_trace(const SmoothingSystem& system, double lambda, int probes,
                              std::uint64_t seed, const SolverOptions& options = {});
TraceEstimate influence_trace(const Grid& grid, const DataSet& data, PenaltyKind kind,
                              double lambda, int probes, std::uint64_t seed,
                              const SolverOptions& options = {});

/// N r / (N - trace)^2. Throws DegenerateGcv when trace >= N.
double gcv_score(std::size_t n, double residual_sq, double trace);

/// Solves at lambda and scores with the given trace.
double gcv_score(const Grid& grid, const DataSet& data, PenaltyKind kind, double lambda,
                 double trace_estimate, const SolverOptions& options = {});

/// One full evaluation: spline solve, trace estimate, score.
GcvRecord evaluate_gcv(const SmoothingSystem& system, double lambda, const GcvConfig& config);

/// Grid scan then golden-section refinement in log lambda around the grid
/// argmin. Throws SelectionFailure when every grid score is degenerate.
GcvSelection select_lambda(const SmoothingSystem& system, const GcvConfig& config);
GcvSelection select_lambda(const Grid& grid, const DataSet& data, PenaltyKind kind,
                           const GcvConfig& config,
                           BiharmonicScheme scheme = BiharmonicScheme::ThinPlate);

/// Header lambda,residual_sq,trace_est,gcv, one row per grid value, then a
/// comment line with the selected lambda.
void write_gcv_csv(std::ostream& out, const GcvSelection& selection);

}  // namespace lspline

#include "lspline/gcv.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "lspline/error.hpp"
#include "lspline/random.hpp"

namespace lspline {

std::vector<double> log_lambda_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    std::ostringstream msg;
    msg << "lambda grid needs 0 < lo < hi and count >= 2, got lo=" << lo << " hi=" << hi
        << " count=" << count;
    throw InvalidArgument(msg.str());
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int k = 0; k < count; ++k)
    out[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * k / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

void GcvConfig::validate() const {
  if (lambdas.empty()) throw InvalidArgument("lambda grid is empty");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0.0) || !std::isfinite(lambdas[k]))
      throw InvalidArgument("lambda grid values must be positive and finite");
    if (k > 0 && !(lambdas[k] > lambdas[k - 1]))
      throw InvalidArgument("lambda grid must be strictly increasing");
  }
  if (probes < 1) throw InvalidArgument("probe count must be at least 1");
  if (refine_evaluations < 0) throw InvalidArgument("refine_evaluations must be >= 0");
  if (jobs < 1) throw InvalidArgument("jobs must be at least 1");
}

namespace {

constexpr std::uint64_t kProbeStream = 0x7072;  // distinct from the noise streams

Vector probe(std::uint64_t seed, int k, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::uint64_t bits = hash_draw(seed, kProbeStream + static_cast<std::uint64_t>(k),
                                         static_cast<std::uint64_t>(i));
    v[i] = (bits >> 63) ? 1.0 : -1.0;
  }
  return v;
}

TraceEstimate summarize(const std::vector<double>& terms) {
  const int probes = static_cast<int>(terms.size());
  TraceEstimate est;
  for (double t : terms) est.mean += t;
  est.mean /= probes;
  if (probes > 1) {
    double ss = 0.0;
    for (double t : terms) ss += (t - est.mean) * (t - est.mean);
    est.std_error = std::sqrt(ss / (probes - 1) / probes);
  }
  return est;
}

TraceEstimate trace_with(const SmoothingSystem& system, double lambda, int probes,
                         std::uint64_t seed, const PreconditionerOp& precond,
                         const SolverOptions& options) {
  if (probes < 1) throw InvalidArgument("probe count must be at least 1");
  const SparseMatrix& a = system.point_eval();
  std::vector<double> terms(static_cast<std::size_t>(probes));
  for (int k = 0; k < probes; ++k) {
    const Vector v = probe(seed, k, a.rows());
    const Vector b = a.transpose() * v;
    const CgResult cg = system.solve(lambda, b, precond, options);
    terms[static_cast<std::size_t>(k)] = v.dot(a * cg.x);
  }
  return summarize(terms);
}

// Same probes, with S applied through the data-space spectrum.
struct SpectralTerms {
  Vector fit_weight;       // eigenvalues of S(lambda)
  Vector residual_weight;  // eigenvalues of I - S(lambda)
};

SpectralTerms spectral_terms(const SmoothingSystem::DataSpectrum& spec, double lambda) {
  SpectralTerms t;
  const Vector denom = (lambda + (1.0 - lambda) * spec.mu.array()).matrix();
  t.fit_weight = spec.mu.cwiseQuotient(denom);
  t.residual_weight = (lambda * (1.0 - spec.mu.array())).matrix().cwiseQuotient(denom);
  return t;
}

TraceEstimate spectral_trace(const SmoothingSystem& system, double lambda, int probes,
                             std::uint64_t seed) {
  if (probes < 1) throw InvalidArgument("probe count must be at least 1");
  const auto& spec = system.data_spectrum();
  const SpectralTerms t = spectral_terms(spec, lambda);
  std::vector<double> terms(static_cast<std::size_t>(probes));
  for (int k = 0; k < probes; ++k) {
    const Vector q = spec.v.transpose() * probe(seed, k, spec.v.rows());
    terms[static_cast<std::size_t>(k)] = q.cwiseAbs2().dot(t.fit_weight);
  }
  return summarize(terms);
}

bool use_spectrum(const SmoothingSystem& system, const SolverOptions& options) {
  return system.resolve(options.preconditioner) == Preconditioner::LowRank;
}

}  // namespace

TraceEstimate influence_trace(const SmoothingSystem& system, double lambda, int probes,
                              std::uint64_t seed, const SolverOptions& options) {
  if (use_spectrum(system, options)) return spectral_trace(system, lambda, probes, seed);
  const auto precond = system.make_preconditioner(lambda, options.preconditioner);
  return trace_with(system, lambda, probes, seed, *precond, options);
}

TraceEstimate influence_trace(const Grid& grid, const DataSet& data, PenaltyKind kind,
                              double lambda, int probes, std::uint64_t seed,
                              const SolverOptions& options) {
  const SmoothingSystem system(grid, data, kind);
  return influence_trace(system, lambda, probes, seed, options);
}

double gcv_score(std::size_t n, double residual_sq, double trace) {
  const double nd = static_cast<double>(n);
  if (!(trace < nd)) {
    std::ostringstream msg;
    msg << "GCV denominator vanishes: trace estimate " << trace << " >= N = " << n;
    throw DegenerateGcv(msg.str());
  }
  const double gap = nd - trace;
  return nd * residual_sq / (gap * gap);
}

namespace {

double residual_sq(const SmoothingSystem& system, const Vector& u) {
  return (system.observations() - system.point_eval() * u).squaredNorm();
}

}  // namespace

double gcv_score(const Grid& grid, const DataSet& data, PenaltyKind kind, double lambda,
                 double trace_estimate, const SolverOptions& options) {
  const SmoothingSystem system(grid, data, kind);
  const SplineSolution s = solve(system, lambda, options);
  return gcv_score(system.observation_count(), residual_sq(system, s.coefficients),
                   trace_estimate);
}

GcvRecord evaluate_gcv(const SmoothingSystem& system, double lambda, const GcvConfig& config) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("smoothing parameter must be positive and finite");
  GcvRecord rec;
  rec.lambda = lambda;
  TraceEstimate trace;
  if (use_spectrum(system, config.solver)) {
    const auto& spec = system.data_spectrum();
    const Vector w = spec.v.transpose() * system.observations();
    rec.residual_sq = w.cwiseProduct(spectral_terms(spec, lambda).residual_weight).squaredNorm();
    trace = spectral_trace(system, lambda, config.probes, config.seed);
  } else {
    const auto precond = system.make_preconditioner(lambda, config.solver.preconditioner);
    const CgResult fit = system.solve(lambda, system.rhs(), *precond, config.solver);
    rec.residual_sq = residual_sq(system, fit.x);
    trace = trace_with(system, lambda, config.probes, config.seed, *precond, config.solver);
  }
  rec.trace_estimate = trace.mean;
  rec.trace_std_error = trace.std_error;
  try {
    rec.gcv = gcv_score(system.observation_count(), rec.residual_sq, trace.mean);
  } catch (const DegenerateGcv&) {
    rec.gcv = std::numeric_limits<double>::quiet_NaN();
    rec.degenerate = true;
  }
  return rec;
}

namespace {

std::vector<GcvRecord> scan(const SmoothingSystem& system, const GcvConfig& config) {
  const std::size_t count = config.lambdas.size();
  std::vector<GcvRecord> records(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        records[k] = evaluate_gcv(system, config.lambdas[k], config);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return records;
}

bool better(const GcvRecord& a, const GcvRecord& b) {
  if (a.degenerate) return false;
  if (b.degenerate) return true;
  return a.gcv < b.gcv;
}

}  // namespace

GcvSelection select_lambda(const SmoothingSystem& system, const GcvConfig& config) {
  config.validate();
  GcvSelection sel;
  sel.curve = scan(system, config);
  std::size_t arg = 0;
  for (std::size_t k = 1; k < sel.curve.size(); ++k)
    if (better(sel.curve[k], sel.curve[arg])) arg = k;
  if (sel.curve[arg].degenerate)
    throw SelectionFailure("every GCV score on the lambda grid is degenerate");
  sel.best = sel.curve[arg];

  if (config.refine_evaluations > 0 && sel.curve.size() > 1) {
    // Golden-section search in log10(lambda) over the cells next to the argmin.
    const std::size_t last = sel.curve.size() - 1;
    double lo = std::log10(config.lambdas[arg == 0 ? 0 : arg - 1]);
    double hi = std::log10(config.lambdas[std::min(arg + 1, last)]);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto eval = [&](double t) {
      GcvRecord rec = evaluate_gcv(system, std::pow(10.0, t), config);
      sel.refinement.push_back(rec);
      if (better(rec, sel.best)) sel.best = rec;
      return rec.degenerate ? std::numeric_limits<double>::infinity() : rec.gcv;
    };
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = eval(c);
    int used = 1;
    double fd = 0.0;
    if (used < config.refine_evaluations) {
      fd = eval(d);
      ++used;
    }
    while (used < config.refine_evaluations) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - inv_phi * (hi - lo);
        fc = eval(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + inv_phi * (hi - lo);
        fd = eval(d);
      }
      ++used;
    }
  }
  sel.lambda = sel.best.lambda;
  return sel;
}

GcvSelection select_lambda(const Grid& grid, const DataSet& data, PenaltyKind kind,
                           const GcvConfig& config, BiharmonicScheme scheme) {
  const SmoothingSystem system(grid, data, kind, scheme);
  return select_lambda(system, config);
}

void write_gcv_csv(std::ostream& out, const GcvSelection& selection) {
  const auto old_precision = out.precision(17);
  out << "lambda,residual_sq,trace_est,gcv\n";
  for (const GcvRecord& r : selection.curve) {
    out << r.lambda << ',' << r.residual_sq << ',' << r.trace_estimate << ',';
    if (r.degenerate) out << "nan";
    else out << r.gcv;
    out << '\n';
  }
  out << "# argmin lambda=" << selection.lambda << '\n';
  out.precision(old_precision);
}

}  // namespace lspline

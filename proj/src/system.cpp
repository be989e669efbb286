#include "lspline/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>

#include "lspline/assembly.hpp"
#include "lspline/error.hpp"
#include "sparse_cholesky.hpp"

namespace lspline {

DataSet DataSet::from(std::vector<Point> points, std::vector<double> values) {
  DataSet d;
  d.mask.assign(points.size(), 1);
  d.points = std::move(points);
  d.values = std::move(values);
  d.validate();
  return d;
}

std::size_t DataSet::active_count() const {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(),
                                                [](std::uint8_t m) { return m != 0; }));
}

void DataSet::validate() const {
  if (points.size() != values.size() || points.size() != mask.size()) {
    std::ostringstream msg;
    msg << "data set arrays disagree: " << points.size() << " points, " << values.size()
        << " values, " << mask.size() << " mask entries";
    throw ShapeMismatch(msg.str());
  }
}

int default_max_iter(std::size_t unknowns) {
  return static_cast<int>(10.0 * std::sqrt(static_cast<double>(unknowns))) + 1000;
}

namespace {

class JacobiPreconditioner final : public PreconditionerOp {
public:
  explicit JacobiPreconditioner(Vector inv_diag) : inv_diag_(std::move(inv_diag)) {}
  void apply(const Vector& r, Vector& z) const override { z = r.cwiseProduct(inv_diag_); }

private:
  Vector inv_diag_;
};

using detail::CholeskyAnalysis;
using detail::CholeskyFactor;

class CholeskyPreconditioner final : public PreconditionerOp {
public:
  CholeskyPreconditioner(const CholeskyAnalysis& analysis, const SparseMatrix& h)
      : factor_(analysis, h) {}
  void apply(const Vector& r, Vector& z) const override { z = factor_.solve(r); }

private:
  CholeskyFactor factor_;
};

double row_sum_norm(const SparseMatrix& m) {
  double best = 0.0;
  for (int r = 0; r < m.outerSize(); ++r) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) sum += std::abs(it.value());
    best = std::max(best, sum);
  }
  return best;
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    std::ostringstream msg;
    msg << "smoothing parameter must be positive and finite, got " << lambda;
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

std::string_view to_string(Preconditioner p) {
  switch (p) {
    case Preconditioner::Jacobi: return "jacobi";
    case Preconditioner::Cholesky: return "cholesky";
    case Preconditioner::LowRank: return "lowrank";
    case Preconditioner::Auto: return "auto";
  }
  return "unknown";
}

Preconditioner parse_preconditioner(std::string_view name) {
  for (Preconditioner p : {Preconditioner::Jacobi, Preconditioner::Cholesky,
                           Preconditioner::LowRank, Preconditioner::Auto})
    if (name == to_string(p)) return p;
  throw InvalidArgument("unknown preconditioner '" + std::string(name) +
                        "' (expected jacobi, cholesky, lowrank or auto)");
}

// Q = P + A^T A factored once; C = A Q^-1 A^T on the data space.
struct SmoothingSystem::LowRankState {
  std::unique_ptr<CholeskyFactor> q_factor;
  DenseMatrix c;
};

struct SmoothingSystem::LowRankSlot {
  std::once_flag analysis_once;
  std::unique_ptr<CholeskyAnalysis> analysis;
  std::once_flag once;
  std::unique_ptr<LowRankState> state;
  std::once_flag spectrum_once;
  std::unique_ptr<DataSpectrum> spectrum;
};

const SmoothingSystem::DataSpectrum& SmoothingSystem::data_spectrum() const {
  const LowRankState& state = low_rank_state();
  std::call_once(low_rank_->spectrum_once, [&] {
    const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(state.c);
    if (eig.info() != Eigen::Success)
      throw NotPositiveDefinite("eigendecomposition of the data-space matrix failed");
    auto spec = std::make_unique<DataSpectrum>();
    // C is a contraction with spectrum in [0, 1]; clamp rounding spill.
    spec->mu = eig.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
    spec->v = eig.eigenvectors();
    low_rank_->spectrum = std::move(spec);
  });
  return *low_rank_->spectrum;
}

const detail::CholeskyAnalysis& SmoothingSystem::cholesky_analysis() const {
  std::call_once(low_rank_->analysis_once, [this] {
    low_rank_->analysis = std::make_unique<CholeskyAnalysis>(normal_matrix(1.0));
  });
  return *low_rank_->analysis;
}

const SmoothingSystem::LowRankState& SmoothingSystem::low_rank_state() const {
  std::call_once(low_rank_->once, [this] {
    auto state = std::make_unique<LowRankState>();
    state->q_factor = std::make_unique<CholeskyFactor>(cholesky_analysis(), normal_matrix(1.0));
    const Eigen::Index n_obs = a_.rows();
    state->c.resize(n_obs, n_obs);
    constexpr Eigen::Index kBlock = 64;
    for (Eigen::Index start = 0; start < n_obs; start += kBlock) {
      const Eigen::Index width = std::min(kBlock, n_obs - start);
      const DenseMatrix cols = DenseMatrix(at_.middleCols(start, width));
      const DenseMatrix y = state->q_factor->solve(cols);
      state->c.middleCols(start, width) = a_ * y;
    }
    const DenseMatrix ct = state->c.transpose();
    state->c = 0.5 * (state->c + ct);
    low_rank_->state = std::move(state);
  });
  return *low_rank_->state;
}

namespace {

// H(lambda) = lambda Q + (1 - lambda) A^T A with Q = P + A^T A, so
// H^-1 = (1/lambda) [Q^-1 - Q^-1 A^T (lambda/(1-lambda) I + C)^-1 A Q^-1].
class LowRankPreconditioner final : public PreconditionerOp {
public:
  LowRankPreconditioner(const CholeskyFactor& q_factor, const DenseMatrix& c, const SparseMatrix& a,
                        const SparseMatrix& at, double lambda)
      : q_(q_factor), a_(a), at_(at), lambda_(lambda), exact_q_(lambda == 1.0) {
    if (!exact_q_) {
      DenseMatrix m = c;
      m.diagonal().array() += lambda / (1.0 - lambda);
      ldlt_.compute(m);
      if (ldlt_.info() != Eigen::Success)
        throw NotPositiveDefinite("data-space factorization for the low-rank update failed");
    }
  }

  void apply(const Vector& r, Vector& z) const override {
    const Vector y = q_.solve(r);
    if (exact_q_) {
      z = y;
      return;
    }
    const Vector t = ldlt_.solve(Vector(a_ * y));
    const Vector w = q_.solve(Vector(at_ * t));
    z = (y - w) / lambda_;
  }

private:
  const CholeskyFactor& q_;
  const SparseMatrix& a_;
  const SparseMatrix& at_;
  double lambda_;
  bool exact_q_;
  Eigen::LDLT<DenseMatrix> ldlt_;
};

}  // namespace

SmoothingSystem::SmoothingSystem(Grid grid, const DataSet& data, PenaltyKind kind,
                                 BiharmonicScheme scheme)
    : grid_(std::move(grid)), kind_(kind), low_rank_(std::make_shared<LowRankSlot>()) {
  data.validate();
  std::vector<Point> points;
  std::vector<double> values;
  points.reserve(data.size());
  values.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data.mask[i]) continue;
    points.push_back(data.points[i]);
    values.push_back(data.values[i]);
  }
  if (points.empty()) throw EmptyData("no observations left after applying the inclusion mask");
  try {
    a_ = assemble_point_eval(grid_, points);
  } catch (const OutOfDomain& e) {
    // Report the index in the caller's data set, not the compacted one.
    std::size_t seen = 0;
    std::size_t original = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!data.mask[i]) continue;
      if (seen++ == e.index()) {
        original = i;
        break;
      }
    }
    std::ostringstream msg;
    msg << "data point " << original << " lies outside the domain";
    throw OutOfDomain(msg.str(), original);
  }
  at_ = a_.transpose();
  ata_ = at_ * a_;
  p_ = cached_penalty_matrix(kind, grid_, scheme);
  z_ = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  rhs_ = at_ * z_;
  p_norm_ = row_sum_norm(*p_);
  // ||A^T A||_inf <= ||A^T||_inf ||A||_inf.
  ata_norm_ = row_sum_norm(at_) * row_sum_norm(a_);
}

double SmoothingSystem::norm_bound(double lambda) const { return lambda * p_norm_ + ata_norm_; }

double SmoothingSystem::residual_floor(double lambda, const Vector& u, double b_norm) const {
  if (b_norm == 0.0) return 0.0;
  return std::numeric_limits<double>::epsilon() * norm_bound(lambda) * u.norm() / b_norm;
}

void SmoothingSystem::apply(double lambda, const Vector& x, Vector& y) const {
  y.noalias() = *p_ * x;
  y *= lambda;
  const Vector ax = a_ * x;
  y.noalias() += at_ * ax;
}

SparseMatrix SmoothingSystem::normal_matrix(double lambda) const {
  SparseMatrix h = ata_ + lambda * (*p_);
  h.makeCompressed();
  return h;
}

Preconditioner SmoothingSystem::resolve(Preconditioner type) const {
  if (type != Preconditioner::Auto) return type;
  const std::size_t n_obs = observation_count();
  if (n_obs <= kLowRankMaxObservations && 4 * n_obs <= unknowns()) return Preconditioner::LowRank;
  return Preconditioner::Cholesky;
}

std::unique_ptr<PreconditionerOp> SmoothingSystem::make_preconditioner(
    double lambda, Preconditioner type) const {
  check_lambda(lambda);
  type = resolve(type);
  if (type == Preconditioner::Cholesky)
    return std::make_unique<CholeskyPreconditioner>(cholesky_analysis(), normal_matrix(lambda));
  if (type == Preconditioner::LowRank) {
    const LowRankState& state = low_rank_state();
    return std::make_unique<LowRankPreconditioner>(*state.q_factor, state.c, a_, at_, lambda);
  }
  Vector diag = lambda * p_->diagonal();
  for (int j = 0; j < at_.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(at_, j); it; ++it) diag[j] += it.value() * it.value();
  return std::make_unique<JacobiPreconditioner>(diag.cwiseInverse());
}

CgResult SmoothingSystem::solve(double lambda, const Vector& b, const PreconditionerOp& precond,
                                const SolverOptions& options) const {
  check_lambda(lambda);
  const int max_iter = options.max_iter > 0 ? options.max_iter : default_max_iter(unknowns());
  CgResult result;
  result.x = Vector::Zero(b.size());
  result.min_curvature = std::numeric_limits<double>::infinity();
  const double b_norm = b.norm();
  if (b_norm == 0.0) return result;

  Vector r = b;
  Vector z(b.size()), p(b.size()), q(b.size());
  precond.apply(r, z);
  p = z;
  double rz = r.dot(z);
  double rel = 1.0;
  for (int it = 1; it <= max_iter; ++it) {
    apply(lambda, p, q);
    const double pq = p.dot(q);
    const double pp = p.squaredNorm();
    if (!(pq > 0.0)) {
      std::ostringstream msg;
      msg << "conjugate gradient met a direction of nonpositive curvature (p^T H p = " << pq
          << ") at iteration " << it;
      throw NotPositiveDefinite(msg.str());
    }
    result.min_curvature = std::min(result.min_curvature, pq / pp);
    const double alpha = rz / pq;
    result.x.noalias() += alpha * p;
    r.noalias() -= alpha * q;
    result.iterations = it;
    rel = r.norm() / b_norm;
    if (rel <= options.tol || rel <= residual_floor(lambda, result.x, b_norm)) {
      // The recursive residual drifts; confirm against b - H x before stopping.
      apply(lambda, result.x, q);
      r = b - q;
      rel = r.norm() / b_norm;
      if (rel <= std::max(options.tol, residual_floor(lambda, result.x, b_norm))) {
        result.relative_residual = rel;
        return result;
      }
      precond.apply(r, z);
      p = z;
      rz = r.dot(z);
      continue;
    }
    precond.apply(r, z);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  std::ostringstream msg;
  msg << "conjugate gradient did not reach relative residual " << options.tol << " within "
      << max_iter << " iterations (residual " << rel << ")";
  throw IterationLimit(msg.str(), max_iter, rel);
}

Vector build_rhs(const SparseMatrix& a, const Vector& z, std::span<const std::uint8_t> mask) {
  if (a.rows() != z.size() || static_cast<std::size_t>(z.size()) != mask.size())
    throw ShapeMismatch("build_rhs: A rows, observations and mask must have equal length");
  Vector masked = z;
  bool any = false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) any = true;
    else masked[static_cast<Eigen::Index>(i)] = 0.0;
  }
  if (!any) throw EmptyData("no observations left after applying the inclusion mask");
  return a.transpose() * masked;
}

SplineSolution solve(const SmoothingSystem& system, double lambda, const SolverOptions& options) {
  const auto precond = system.make_preconditioner(lambda, options.preconditioner);
  CgResult cg = system.solve(lambda, system.rhs(), *precond, options);
  return SplineSolution{system.grid(), std::move(cg.x), system.kind(), lambda, cg.iterations,
                        cg.relative_residual};
}

SplineSolution solve(const Grid& grid, const DataSet& data, PenaltyKind kind, double lambda,
                     const SolverOptions& options, BiharmonicScheme scheme) {
  check_lambda(lambda);
  const SmoothingSystem system(grid, data, kind, scheme);
  return solve(system, lambda, options);
}

double evaluate(const SplineSolution& solution, Point p) {
  const Grid& g = solution.grid;
  const Location loc = g.locate(p);
  std::size_t nodes[4];
  g.element_nodes(loc.i, loc.j, nodes);
  const Vector& u = solution.coefficients;
  const auto c = [&](int a) { return u[static_cast<Eigen::Index>(nodes[a])]; };
  return (1.0 - loc.xi) * (1.0 - loc.eta) * c(0) + loc.xi * (1.0 - loc.eta) * c(1) +
         loc.xi * loc.eta * c(2) + (1.0 - loc.xi) * loc.eta * c(3);
}

Vector evaluate(const SplineSolution& solution, std::span<const Point> points) {
  Vector out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t k = 0; k < points.size(); ++k) {
    try {
      out[static_cast<Eigen::Index>(k)] = evaluate(solution, points[k]);
    } catch (const OutOfDomain&) {
      std::ostringstream msg;
      msg << "evaluation point " << k << " lies outside the domain";
      throw OutOfDomain(msg.str(), k);
    }
  }
  return out;
}

DenseMatrix dense_normal_matrix(const SmoothingSystem& system, double lambda) {
  if (system.unknowns() > kDenseOracleMaxNodes) {
    std::ostringstream msg;
    msg << "dense oracle limited to " << kDenseOracleMaxNodes << " nodes, got "
        << system.unknowns();
    throw SizeGuard(msg.str());
  }
  const DenseMatrix a(system.point_eval());
  const DenseMatrix p(system.penalty());
  return a.transpose() * a + lambda * p;
}

Vector dense_oracle_solve(const Grid& grid, const DataSet& data, PenaltyKind kind, double lambda,
                          BiharmonicScheme scheme) {
  check_lambda(lambda);
  if (grid.node_count() > kDenseOracleMaxNodes) {
    std::ostringstream msg;
    msg << "dense oracle limited to " << kDenseOracleMaxNodes << " nodes, got "
        << grid.node_count();
    throw SizeGuard(msg.str());
  }
  const SmoothingSystem system(grid, data, kind, scheme);
  const DenseMatrix h = dense_normal_matrix(system, lambda);
  const Eigen::LLT<DenseMatrix> llt(h);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("dense Cholesky factorization of H(lambda) failed");
  const DenseMatrix a(system.point_eval());
  return llt.solve(a.transpose() * system.observations());
}

}  // namespace lspline

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "lspline/grid.hpp"
#include "lspline/penalty.hpp"
#include "lspline/sparse.hpp"

namespace lspline {

namespace detail {
class CholeskyAnalysis;
}

/// Scattered observations z_i at points p_i; mask[i] == 0 drops row i.
struct DataSet {
  std::vector<Point> points;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;

  /// All rows included.
  static DataSet from(std::vector<Point> points, std::vector<double> values);

  std::size_t size() const { return points.size(); }
  std::size_t active_count() const;
  /// Throws ShapeMismatch when the three arrays disagree in length.
  void validate() const;
};

/**
 * Preconditioners for the CG solve of H(lambda) = A^T A + lambda P.
 *
 * Jacobi    diagonal of H.
 * Cholesky  sparse factorization of H(lambda), refactored per lambda.
 * LowRank   exact inverse through a single factorization of Q = P + A^T A:
 *           H = lambda Q + (1 - lambda) A^T A, and the Woodbury identity
 *           moves the lambda dependence into an N x N system on the data
 *           space. Pays off when N is small next to the node count.
 * Auto      LowRank when N <= kLowRankMaxObservations and 4 N <= nodes,
 *           otherwise Cholesky.
 */
enum class Preconditioner { Jacobi, Cholesky, LowRank, Auto };

inline constexpr std::size_t kLowRankMaxObservations = 1024;

std::string_view to_string(Preconditioner p);
Preconditioner parse_preconditioner(std::string_view name);

/**
 * Stopping rule: the true relative residual ||b - H u|| / ||b|| must fall to
 * tol, or to the rounding floor of the matvec when that is larger,
 * eps * ||H||_inf * ||u|| / ||b||. The floor only binds for large lambda on
 * fine meshes where ||P|| grows like 1/h^2.
 */
struct SolverOptions {
  double tol = 1e-10;  // relative residual ||H u - b|| / ||b||
  int max_iter = 0;    // 0 -> 10 sqrt(unknowns) + 1000
  Preconditioner preconditioner = Preconditioner::Auto;
};

int default_max_iter(std::size_t unknowns);

/// Outcome of one conjugate gradient run.
struct CgResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
  /// Smallest Rayleigh quotient p^T H p / p^T p over the search directions;
  /// strictly positive on every successful run.
  double min_curvature = 0.0;
};

/// z = M^-1 r for a fixed lambda.
class PreconditionerOp {
public:
  virtual ~PreconditionerOp() = default;
  virtual void apply(const Vector& r, Vector& z) const = 0;
};

/**
 * Normal equations (A^T A + lambda P) u = A^T z for one grid, data set and
 * penalty. Only the included rows of the data set enter A and z. H is never
 * stored for the CG matvec: A and A^T are applied in turn.
 */
class SmoothingSystem {
public:
  SmoothingSystem(Grid grid, const DataSet& data, PenaltyKind kind,
                  BiharmonicScheme scheme = BiharmonicScheme::ThinPlate);

  const Grid& grid() const { return grid_; }
  PenaltyKind kind() const { return kind_; }
  /// Point-evaluation matrix restricted to included rows.
  const SparseMatrix& point_eval() const { return a_; }
  const SparseMatrix& penalty() const { return *p_; }
  /// Included observations, in data-set order.
  const Vector& observations() const { return z_; }
  std::size_t unknowns() const { return grid_.node_count(); }
  std::size_t observation_count() const { return static_cast<std::size_t>(z_.size()); }

  /// y = A^T A x + lambda P x.
  void apply(double lambda, const Vector& x, Vector& y) const;
  /// A^T z.
  const Vector& rhs() const { return rhs_; }

  /// Upper bound on ||H(lambda)||_inf without forming H.
  double norm_bound(double lambda) const;
  /// Smallest relative residual the matvec can resolve at u.
  double residual_floor(double lambda, const Vector& u, double b_norm) const;

  /// Explicit H(lambda); for preconditioners and small-problem checks.
  SparseMatrix normal_matrix(double lambda) const;

  std::unique_ptr<PreconditionerOp> make_preconditioner(double lambda,
                                                        Preconditioner type) const;
  /// What Auto resolves to for this system.
  Preconditioner resolve(Preconditioner type) const;

  /**
   * Eigenpairs of C = A Q^-1 A^T, Q = P + A^T A. The influence matrix is
   * S(lambda) = V diag(mu / (lambda + (1 - lambda) mu)) V^T, so fits and
   * quadratic forms in S cost O(N^2) per lambda once C is known. Builds the
   * low-rank state on first use.
   */
  struct DataSpectrum {
    Vector mu;
    DenseMatrix v;
  };
  const DataSpectrum& data_spectrum() const;

  /// Preconditioned CG from u0 = 0. Throws IterationLimit or NotPositiveDefinite.
  CgResult solve(double lambda, const Vector& b, const PreconditionerOp& precond,
                 const SolverOptions& options) const;

private:
  Grid grid_;
  PenaltyKind kind_;
  SparseMatrix a_;
  SparseMatrix at_;
  SparseMatrix ata_;
  std::shared_ptr<const SparseMatrix> p_;
  Vector z_;
  Vector rhs_;
  double p_norm_ = 0.0;
  double ata_norm_ = 0.0;

  struct LowRankState;
  struct LowRankSlot;
  std::shared_ptr<LowRankSlot> low_rank_;
  const LowRankState& low_rank_state() const;
  const detail::CholeskyAnalysis& cholesky_analysis() const;
};

struct SplineSolution {
  Grid grid;
  Vector coefficients;
  PenaltyKind kind = PenaltyKind::Mixed;
  double lambda = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// A^T z over the rows with mask[i] != 0. Throws EmptyData when none remain.
Vector build_rhs(const SparseMatrix& a, const Vector& z, std::span<const std::uint8_t> mask);

/// Throws InvalidArgument for lambda <= 0 and EmptyData for an empty mask.
SplineSolution solve(const Grid& grid, const DataSet& data, PenaltyKind kind, double lambda,
                     const SolverOptions& options = {},
                     BiharmonicScheme scheme = BiharmonicScheme::ThinPlate);

/// Same as above on an already assembled system.
SplineSolution solve(const SmoothingSystem& system, double lambda,
                     const SolverOptions& options = {});

/// sum_i u_i phi_i(p) at each point. Throws OutOfDomain.
Vector evaluate(const SplineSolution& solution, std::span<const Point> points);
double evaluate(const SplineSolution& solution, Point p);

/// Largest node count the dense oracle accepts.
inline constexpr std::size_t kDenseOracleMaxNodes = 400;

/// Dense H(lambda) for a small problem. Throws SizeGuard above the limit.
DenseMatrix dense_normal_matrix(const SmoothingSystem& system, double lambda);

/// Reference solution by dense Cholesky factorization of H(lambda).
Vector dense_oracle_solve(const Grid& grid, const DataSet& data, PenaltyKind kind,
                          double lambda,
                          BiharmonicScheme scheme = BiharmonicScheme::ThinPlate);

}  // namespace lspline

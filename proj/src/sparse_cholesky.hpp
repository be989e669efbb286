#pragma once

#include <memory>

#include "lspline/sparse.hpp"

namespace lspline::detail {

/**
 * Thin CHOLMOD wrapper that separates the symbolic analysis, shared by every
 * matrix with one sparsity pattern, from the numeric factorization. Each
 * numeric factor owns its CHOLMOD workspace, so factors built from one
 * analysis may be used from different threads.
 *
 * The supernodal method is used only when the BLAS underneath passes a
 * small self-test; some optimized BLAS builds return wrong results on some
 * CPUs and the simplicial method does not touch BLAS.
 */
class CholeskyAnalysis {
public:
  /// Pattern of the lower triangle of a symmetric matrix is what counts.
  explicit CholeskyAnalysis(const SparseMatrix& pattern);
  ~CholeskyAnalysis();
  CholeskyAnalysis(const CholeskyAnalysis&) = delete;
  CholeskyAnalysis& operator=(const CholeskyAnalysis&) = delete;

  bool supernodal() const { return supernodal_; }

private:
  friend class CholeskyFactor;
  struct Impl;
  std::unique_ptr<Impl> impl_;
  bool supernodal_ = false;
};

class CholeskyFactor {
public:
  /// Throws NotPositiveDefinite.
  CholeskyFactor(const CholeskyAnalysis& analysis, const SparseMatrix& matrix);
  ~CholeskyFactor();
  CholeskyFactor(const CholeskyFactor&) = delete;
  CholeskyFactor& operator=(const CholeskyFactor&) = delete;

  Vector solve(const Vector& b) const;
  DenseMatrix solve(const DenseMatrix& b) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// True when CHOLMOD's supernodal path factors a test matrix correctly here.
bool supernodal_usable();

}  // namespace lspline::detail

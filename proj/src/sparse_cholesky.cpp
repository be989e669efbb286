#include "sparse_cholesky.hpp"

#include <cholmod.h>

#include <mutex>
#include <vector>

#include "lspline/error.hpp"

namespace lspline::detail {
namespace {

// Row-major storage of a symmetric matrix read as column-major is the same
// matrix; stype -1 makes CHOLMOD use the lower triangle only.
cholmod_sparse view(const SparseMatrix& m) {
  cholmod_sparse s{};
  s.nrow = static_cast<std::size_t>(m.cols());
  s.ncol = static_cast<std::size_t>(m.rows());
  s.nzmax = static_cast<std::size_t>(m.nonZeros());
  s.p = const_cast<int*>(m.outerIndexPtr());
  s.i = const_cast<int*>(m.innerIndexPtr());
  s.x = const_cast<double*>(m.valuePtr());
  s.stype = -1;
  s.itype = CHOLMOD_INT;
  s.xtype = CHOLMOD_REAL;
  s.dtype = CHOLMOD_DOUBLE;
  s.sorted = 1;
  s.packed = 1;
  return s;
}

cholmod_dense view(const DenseMatrix& m) {
  cholmod_dense d{};
  d.nrow = static_cast<std::size_t>(m.rows());
  d.ncol = static_cast<std::size_t>(m.cols());
  d.nzmax = d.nrow * d.ncol;
  d.d = d.nrow;
  d.x = const_cast<double*>(m.data());
  d.xtype = CHOLMOD_REAL;
  d.dtype = CHOLMOD_DOUBLE;
  return d;
}

struct Common {
  cholmod_common c;
  explicit Common(bool supernodal) {
    cholmod_start(&c);
    c.supernodal = supernodal ? CHOLMOD_SUPERNODAL : CHOLMOD_SIMPLICIAL;
    c.print = 0;
    c.error_handler = nullptr;
  }
  ~Common() { cholmod_finish(&c); }
  Common(const Common&) = delete;
  Common& operator=(const Common&) = delete;
};

bool run_self_test() {
  // Shifted 5-point Laplacian on a 12 x 12 grid; large enough for supernodes.
  constexpr int m = 12;
  std::vector<Eigen::Triplet<double, int>> t;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const int k = j * m + i;
      t.emplace_back(k, k, 4.5);
      if (i > 0) t.emplace_back(k, k - 1, -1.0);
      if (i + 1 < m) t.emplace_back(k, k + 1, -1.0);
      if (j > 0) t.emplace_back(k, k - m, -1.0);
      if (j + 1 < m) t.emplace_back(k, k + m, -1.0);
    }
  SparseMatrix a(m * m, m * m);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  Common common(true);
  cholmod_sparse as = view(a);
  cholmod_factor* f = cholmod_analyze(&as, &common.c);
  if (!f) return false;
  bool ok = cholmod_factorize(&as, f, &common.c) && common.c.status == CHOLMOD_OK && f->is_super;
  if (ok) {
    const DenseMatrix b = DenseMatrix::Ones(m * m, 1);
    cholmod_dense bd = view(b);
    cholmod_dense* x = cholmod_solve(CHOLMOD_A, f, &bd, &common.c);
    if (!x) {
      ok = false;
    } else {
      const Eigen::Map<const Vector> xv(static_cast<const double*>(x->x), m * m);
      ok = (a * xv - b.col(0)).norm() <= 1e-12 * b.norm();
      cholmod_free_dense(&x, &common.c);
    }
  }
  cholmod_free_factor(&f, &common.c);
  return ok;
}

}  // namespace

bool supernodal_usable() {
  static const bool usable = run_self_test();
  return usable;
}

struct CholeskyAnalysis::Impl {
  explicit Impl(bool supernodal) : common(supernodal) {}
  Common common;
  cholmod_factor* symbolic = nullptr;
};

CholeskyAnalysis::CholeskyAnalysis(const SparseMatrix& pattern) {
  supernodal_ = supernodal_usable();
  impl_ = std::make_unique<Impl>(supernodal_);
  cholmod_sparse as = view(pattern);
  impl_->symbolic = cholmod_analyze(&as, &impl_->common.c);
  if (!impl_->symbolic) throw Error("CHOLMOD symbolic analysis failed");
}

CholeskyAnalysis::~CholeskyAnalysis() {
  if (impl_ && impl_->symbolic) cholmod_free_factor(&impl_->symbolic, &impl_->common.c);
}

struct CholeskyFactor::Impl {
  explicit Impl(bool supernodal) : common(supernodal) {}
  // cholmod_solve writes into the workspace, hence mutable and locked.
  mutable Common common;
  mutable std::mutex mutex;
  cholmod_factor* factor = nullptr;
  std::size_t n = 0;
};

CholeskyFactor::CholeskyFactor(const CholeskyAnalysis& analysis, const SparseMatrix& matrix) {
  impl_ = std::make_unique<Impl>(analysis.supernodal());
  impl_->n = static_cast<std::size_t>(matrix.rows());
  impl_->factor = cholmod_copy_factor(analysis.impl_->symbolic, &impl_->common.c);
  if (!impl_->factor) throw Error("CHOLMOD could not copy the symbolic factor");
  cholmod_sparse as = view(matrix);
  const int ok = cholmod_factorize(&as, impl_->factor, &impl_->common.c);
  if (!ok || impl_->common.c.status != CHOLMOD_OK)
    throw NotPositiveDefinite("sparse Cholesky factorization failed: matrix not positive definite");
}

CholeskyFactor::~CholeskyFactor() {
  if (impl_ && impl_->factor) cholmod_free_factor(&impl_->factor, &impl_->common.c);
}

DenseMatrix CholeskyFactor::solve(const DenseMatrix& b) const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  cholmod_dense bd = view(b);
  cholmod_dense* x = cholmod_solve(CHOLMOD_A, impl_->factor, &bd, &impl_->common.c);
  if (!x) throw Error("CHOLMOD solve failed");
  DenseMatrix out = Eigen::Map<const DenseMatrix>(static_cast<const double*>(x->x), b.rows(), b.cols());
  cholmod_free_dense(&x, &impl_->common.c);
  return out;
}

Vector CholeskyFactor::solve(const Vector& b) const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  cholmod_dense bd{};
  bd.nrow = static_cast<std::size_t>(b.size());
  bd.ncol = 1;
  bd.nzmax = bd.nrow;
  bd.d = bd.nrow;
  bd.x = const_cast<double*>(b.data());
  bd.xtype = CHOLMOD_REAL;
  bd.dtype = CHOLMOD_DOUBLE;
  cholmod_dense* x = cholmod_solve(CHOLMOD_A, impl_->factor, &bd, &impl_->common.c);
  if (!x) throw Error("CHOLMOD solve failed");
  Vector out = Eigen::Map<const Vector>(static_cast<const double*>(x->x), b.size());
  cholmod_free_dense(&x, &impl_->common.c);
  return out;
}

}  // namespace lspline::detail

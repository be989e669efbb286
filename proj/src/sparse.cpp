#include "lspline/sparse.hpp"

#include <cstdio>
#include <ostream>

namespace lspline {

void write_matrix_market(const SparseMatrix& m, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  char buf[64];
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << (it.row() + 1) << ' ' << (it.col() + 1) << ' ' << buf << '\n';
    }
  }
}

bool is_exactly_symmetric(const SparseMatrix& m) {
  if (m.rows() != m.cols()) return false;
  const SparseMatrix t = m.transpose();
  if (t.nonZeros() != m.nonZeros()) return false;
  for (int r = 0; r < m.outerSize(); ++r) {
    SparseMatrix::InnerIterator a(m, r);
    SparseMatrix::InnerIterator b(t, r);
    for (; a && b; ++a, ++b) {
      if (a.col() != b.col() || a.value() != b.value()) return false;
    }
    if (a || b) return false;
  }
  return true;
}

}  // namespace lspline

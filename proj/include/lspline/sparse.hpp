#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <iosfwd>

namespace lspline {

/// Compressed sparse row matrix; column indices are strictly increasing per row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// MatrixMarket coordinate format, real general, 1-based indices.
void write_matrix_market(const SparseMatrix& m, std::ostream& out);

/// True when every stored (i, j) has a bitwise-equal (j, i) entry.
bool is_exactly_symmetric(const SparseMatrix& m);

}  // namespace lspline

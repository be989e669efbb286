#pragma once

#include <span>

#include "lspline/grid.hpp"
#include "lspline/sparse.hpp"

namespace lspline {

/// Exact Q1 element integrals on an hx x hy rectangle, corners ordered
/// (origin, +x, +x+y, +y).
struct ElementMatrices {
  Eigen::Matrix4d stiffness;    // int grad(phi_a) . grad(phi_b)
  Eigen::Matrix4d mixed;        // int d2phi_a/dxdy * d2phi_b/dxdy
  Eigen::Matrix4d lumped_mass;  // diagonal, hx*hy/4 per corner
};

ElementMatrices local_matrices(double hx, double hy);

SparseMatrix assemble_stiffness(const Grid& grid);
SparseMatrix assemble_mixed(const Grid& grid);
SparseMatrix assemble_lumped_mass(const Grid& grid);

/// Discrete biharmonic K D^-1 K from the lumped-mass Laplacian D^-1 K.
SparseMatrix assemble_biharmonic(const Grid& grid);

enum class Axis { X, Y };

/// G_ij = int phi_i dphi_j/dx (or d/dy) with the mass in the transverse
/// direction lumped, so G couples nodes along one grid line only. Exact on
/// functions affine in the differentiated variable: G x = diag(D).
SparseMatrix assemble_weak_derivative(const Grid& grid, Axis axis);

/**
 * Second-derivative energy built on recovered gradients.
 *
 * The gradient of u_h is recovered nodewise as g = D^-1 G u (lumped L2
 * projection), and the penalty is int |grad g_x|^2 + |grad g_y|^2, i.e.
 * sum over axes of G^T D^-1 K D^-1 G. Affine functions have constant
 * recovered gradients and are exactly in the null space.
 */
SparseMatrix assemble_recovered_hessian(const Grid& grid);

/**
 * Thin-plate energy int u_xx^2 + 2 u_xy^2 + u_yy^2.
 *
 * The u_xy part is exact for Q1 (it is 2 M). u_xx is recovered along each
 * grid line as the lumped 1D Laplacian m^-1 S u and weighted by the lumped
 * 2D mass; nodes on the two boundary lines normal to the derivative carry
 * no weight, since the one-sided value there is not a second derivative.
 * Null space: affine functions.
 */
SparseMatrix assemble_thin_plate(const Grid& grid);

/// Rows are Q1 basis values at the points: A_ij = phi_j(p_i).
/// Throws OutOfDomain carrying the index of the first offending point.
SparseMatrix assemble_point_eval(const Grid& grid, std::span<const Point> points);

}  // namespace lspline

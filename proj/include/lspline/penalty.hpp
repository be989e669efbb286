#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "lspline/grid.hpp"
#include "lspline/sparse.hpp"

namespace lspline {

enum class PenaltyKind { Gradient, Mixed, Biharmonic };

/// How the fourth-order penalty is discretized on C0 bilinear elements.
enum class BiharmonicScheme {
  ThinPlate,         // u_xx^2 + 2 u_xy^2 + u_yy^2, null space = affine
  RecoveredHessian,  // sum over axes of |grad(D^-1 G u)|^2, null space = affine
  LumpedLaplacian,   // K D^-1 K, null space = constants
};

std::string_view to_string(BiharmonicScheme scheme);
BiharmonicScheme parse_biharmonic_scheme(std::string_view name);

/// Short names used on the command line and in reports: grad, mixed, biharm.
std::string_view to_string(PenaltyKind kind);
PenaltyKind parse_penalty(std::string_view name);

/**
 * Penalty operator P of the normal system A^T A + lambda P.
 *
 *   Gradient   -> K
 *   Mixed      -> K + M
 *   Biharmonic -> thin-plate energy (default), recovered Hessian energy or
 *                 K D^-1 K
 */
SparseMatrix penalty_matrix(PenaltyKind kind, const Grid& grid,
                            BiharmonicScheme scheme = BiharmonicScheme::ThinPlate);

/// Memoized penalty_matrix, keyed by (kind, scheme, grid). Thread-safe.
std::shared_ptr<const SparseMatrix> cached_penalty_matrix(
    PenaltyKind kind, const Grid& grid,
    BiharmonicScheme scheme = BiharmonicScheme::ThinPlate);

/// Drops every memoized matrix; outstanding shared_ptrs stay valid.
void clear_penalty_cache();

}  // namespace lspline

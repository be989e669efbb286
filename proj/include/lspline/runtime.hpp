#pragma once

namespace lspline {

/**
 * Some OpenBLAS builds pick a kernel for this CPU that breaks the
 * supernodal sparse Cholesky. The core type is read once when the library
 * loads, so the only fix from inside the process is to set
 * OPENBLAS_CORETYPE and re-execute. Call first thing in main(); returns
 * normally when nothing needs doing or the re-exec is impossible, in which
 * case the slower BLAS-free factorization is used.
 */
void ensure_working_blas(char** argv);

/// Whether sparse factorizations use the supernodal method.
bool supernodal_factorization();

}  // namespace lspline

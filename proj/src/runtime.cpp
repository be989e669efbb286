#include "lspline/runtime.hpp"

#include <unistd.h>

#include <cstdlib>

#include "sparse_cholesky.hpp"

namespace lspline {

void ensure_working_blas(char** argv) {
#if defined(__x86_64__) && defined(__linux__)
  if (detail::supernodal_usable()) return;
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
  if (setenv("OPENBLAS_CORETYPE", "Haswell", 1) != 0) return;
  execv("/proc/self/exe", argv);
  unsetenv("OPENBLAS_CORETYPE");
#else
  (void)argv;
#endif
}

bool supernodal_factorization() { return detail::supernodal_usable(); }

}  // namespace lspline

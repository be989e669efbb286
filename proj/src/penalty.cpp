#include "lspline/penalty.hpp"

#include <map>
#include <mutex>
#include <tuple>

#include "lspline/assembly.hpp"
#include "lspline/error.hpp"

namespace lspline {

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Gradient: return "grad";
    case PenaltyKind::Mixed: return "mixed";
    case PenaltyKind::Biharmonic: return "biharm";
  }
  return "unknown";
}

PenaltyKind parse_penalty(std::string_view name) {
  if (name == "grad" || name == "gradient") return PenaltyKind::Gradient;
  if (name == "mixed") return PenaltyKind::Mixed;
  if (name == "biharm" || name == "biharmonic") return PenaltyKind::Biharmonic;
  throw InvalidArgument("unknown penalty '" + std::string(name) +
                        "' (expected grad, mixed or biharm)");
}

std::string_view to_string(BiharmonicScheme scheme) {
  switch (scheme) {
    case BiharmonicScheme::ThinPlate: return "thin-plate";
    case BiharmonicScheme::RecoveredHessian: return "recovered-hessian";
    case BiharmonicScheme::LumpedLaplacian: return "lumped-laplacian";
  }
  return "unknown";
}

BiharmonicScheme parse_biharmonic_scheme(std::string_view name) {
  for (BiharmonicScheme s : {BiharmonicScheme::ThinPlate, BiharmonicScheme::RecoveredHessian,
                             BiharmonicScheme::LumpedLaplacian})
    if (name == to_string(s)) return s;
  throw InvalidArgument("unknown biharmonic scheme '" + std::string(name) +
                        "' (expected thin-plate, recovered-hessian or lumped-laplacian)");
}

SparseMatrix penalty_matrix(PenaltyKind kind, const Grid& grid, BiharmonicScheme scheme) {
  switch (kind) {
    case PenaltyKind::Gradient:
      return assemble_stiffness(grid);
    case PenaltyKind::Mixed: {
      SparseMatrix p = assemble_stiffness(grid) + assemble_mixed(grid);
      p.makeCompressed();
      return p;
    }
    case PenaltyKind::Biharmonic:
      switch (scheme) {
        case BiharmonicScheme::ThinPlate: return assemble_thin_plate(grid);
        case BiharmonicScheme::RecoveredHessian: return assemble_recovered_hessian(grid);
        case BiharmonicScheme::LumpedLaplacian: return assemble_biharmonic(grid);
      }
      break;
  }
  throw InvalidArgument("unknown penalty kind");
}

namespace {

using CacheKey = std::tuple<int, int, std::size_t, std::size_t, double, double, double, double>;

struct PenaltyCache {
  std::mutex mutex;
  std::map<CacheKey, std::shared_ptr<const SparseMatrix>> entries;
};

PenaltyCache& cache() {
  static PenaltyCache instance;
  return instance;
}

}  // namespace

std::shared_ptr<const SparseMatrix> cached_penalty_matrix(PenaltyKind kind, const Grid& grid,
                                                          BiharmonicScheme scheme) {
  const Domain2& d = grid.domain();
  const CacheKey key{static_cast<int>(kind), static_cast<int>(scheme), grid.nx(), grid.ny(),
                     d.x_min, d.x_max, d.y_min, d.y_max};
  PenaltyCache& c = cache();
  {
    std::lock_guard lock(c.mutex);
    if (auto it = c.entries.find(key); it != c.entries.end()) return it->second;
  }
  auto built = std::make_shared<const SparseMatrix>(penalty_matrix(kind, grid, scheme));
  std::lock_guard lock(c.mutex);
  return c.entries.emplace(key, std::move(built)).first->second;
}

void clear_penalty_cache() {
  PenaltyCache& c = cache();
  std::lock_guard lock(c.mutex);
  c.entries.clear();
}

}  // namespace lspline

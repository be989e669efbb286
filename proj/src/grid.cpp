#include "lspline/grid.hpp"

#include <cmath>
#include <sstream>

#include "lspline/error.hpp"

namespace lspline {

Grid::Grid(Domain2 domain, std::size_t nx, std::size_t ny)
    : domain_(domain), nx_(nx), ny_(ny) {
  if (nx < 2 || ny < 2) {
    std::ostringstream msg;
    msg << "grid needs at least 2 nodes per axis, got " << nx << " x " << ny;
    throw InvalidGrid(msg.str());
  }
  if (!(domain.x_min < domain.x_max) || !(domain.y_min < domain.y_max)) {
    throw InvalidGrid("grid domain must satisfy x_min < x_max and y_min < y_max");
  }
}

void Grid::element_nodes(std::size_t i, std::size_t j, std::size_t out[4]) const {
  out[0] = node_index(i, j);
  out[1] = node_index(i + 1, j);
  out[2] = node_index(i + 1, j + 1);
  out[3] = node_index(i, j + 1);
}

namespace {

// Cell index along one axis and the local coordinate inside it. The node
// coordinates used for the comparisons are the same expressions Grid::x/y
// evaluate, so boundary points resolve identically to an element scan.
template <typename Coord>
std::size_t locate_axis(double v, std::size_t n, double h, Coord coord, double& local) {
  const double origin = coord(0);
  auto k = static_cast<std::ptrdiff_t>(std::floor((v - origin) / h));
  const auto last = static_cast<std::ptrdiff_t>(n) - 2;
  if (k < 0) k = 0;
  if (k > last) k = last;
  while (k > 0 && v <= coord(static_cast<std::size_t>(k))) --k;
  while (k < last && v > coord(static_cast<std::size_t>(k) + 1)) ++k;
  const double lo = coord(static_cast<std::size_t>(k));
  // Exact at nodes so that evaluation there returns the coefficient itself.
  if (v == coord(static_cast<std::size_t>(k) + 1)) {
    local = 1.0;
    return static_cast<std::size_t>(k);
  }
  local = (v - lo) / h;
  if (local < 0.0) local = 0.0;
  if (local > 1.0) local = 1.0;
  return static_cast<std::size_t>(k);
}

}  // namespace

Location Grid::locate(Point p) const {
  if (!domain_.contains(p)) {
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ") lies outside the domain";
    throw OutOfDomain(msg.str(), 0);
  }
  Location loc;
  loc.i = locate_axis(p.x, nx_, hx(), [this](std::size_t i) { return x(i); }, loc.xi);
  loc.j = locate_axis(p.y, ny_, hy(), [this](std::size_t j) { return y(j); }, loc.eta);
  loc.element = element_index(loc.i, loc.j);
  return loc;
}

bool Grid::operator==(const Grid& other) const {
  return nx_ == other.nx_ && ny_ == other.ny_ && domain_.x_min == other.domain_.x_min &&
         domain_.x_max == other.domain_.x_max && domain_.y_min == other.domain_.y_min &&
         domain_.y_max == other.domain_.y_max;
}

Grid make_image_grid(std::size_t rows, std::size_t cols) {
  return Grid(Domain2{0.0, 1.0, 0.0, 1.0}, cols, rows);
}

Grid make_symmetric_grid(std::size_t n_per_axis) {
  return Grid(Domain2{-1.0, 1.0, -1.0, 1.0}, n_per_axis, n_per_axis);
}

Grid refine(const Grid& grid) {
  return Grid(grid.domain(), 2 * grid.nx() - 1, 2 * grid.ny() - 1);
}

}  // namespace lspline

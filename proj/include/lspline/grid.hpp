#pragma once

#include <cstddef>

namespace lspline {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Closed axis-aligned rectangle [x_min, x_max] x [y_min, y_max].
struct Domain2 {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

/// Element containing a point plus the point's local coordinates inside it.
struct Location {
  std::size_t element = 0;
  std::size_t i = 0;  // column of the element's origin node
  std::size_t j = 0;  // row of the element's origin node
  double xi = 0.0;
  double eta = 0.0;
};

/**
 * Tensor-product partition of a rectangle with nx x ny nodes.
 *
 * Nodes are numbered row-major, node (i, j) -> j * nx + i, so that an image
 * with rows along y maps onto the node vector by plain reshaping. Elements
 * are numbered the same way over the (nx-1) x (ny-1) cells and element e has
 * its corners in the counterclockwise order (origin, +x, +x+y, +y).
 *
 * Spacings are derived from the domain and node counts on every call, never
 * stored, so refined grids reproduce coarse node coordinates bit for bit.
 */
class Grid {
public:
  Grid(Domain2 domain, std::size_t nx, std::size_t ny);

  const Domain2& domain() const { return domain_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double hx() const { return domain_.width() / static_cast<double>(nx_ - 1); }
  double hy() const { return domain_.height() / static_cast<double>(ny_ - 1); }

  std::size_t node_count() const { return nx_ * ny_; }
  std::size_t element_count() const { return (nx_ - 1) * (ny_ - 1); }
  std::size_t node_index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
  std::size_t element_index(std::size_t i, std::size_t j) const { return j * (nx_ - 1) + i; }

  double x(std::size_t i) const { return domain_.x_min + static_cast<double>(i) * hx(); }
  double y(std::size_t j) const { return domain_.y_min + static_cast<double>(j) * hy(); }
  Point node(std::size_t k) const { return {x(k % nx_), y(k / nx_)}; }

  /// Global node indices of element (i, j) in local corner order.
  void element_nodes(std::size_t i, std::size_t j, std::size_t out[4]) const;

  /// Element containing p; points on shared edges go to the lowest element index.
  /// Throws OutOfDomain (index 0) when p is outside the closed domain.
  Location locate(Point p) const;

  bool operator==(const Grid& other) const;

private:
  Domain2 domain_;
  std::size_t nx_;
  std::size_t ny_;
};

/// Unit-square grid with one node per pixel of an m-row, n-column image.
Grid make_image_grid(std::size_t rows, std::size_t cols);

/// Grid on [-1, 1]^2 with n nodes per axis.
Grid make_symmetric_grid(std::size_t n_per_axis);

/// Halves both spacings: nx' = 2 nx - 1, ny' = 2 ny - 1.
Grid refine(const Grid& grid);

}  // namespace lspline

#include "lspline/assembly.hpp"

#include <array>
#include <sstream>
#include <vector>

#include "lspline/error.hpp"

namespace lspline {
namespace {

// Local corner a sits at (kCornerX[a], kCornerY[a]) in the reference square.
constexpr std::array<int, 4> kCornerX{0, 1, 1, 0};
constexpr std::array<int, 4> kCornerY{0, 0, 1, 1};

using Mat2 = std::array<std::array<double, 2>, 2>;

Mat2 stiffness_1d(double h) { return {{{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}}}; }
Mat2 mass_1d(double h) { return {{{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}}}; }
Mat2 lumped_mass_1d(double h) { return {{{h / 2.0, 0.0}, {0.0, h / 2.0}}}; }
// int psi_a psi_b' over one cell; independent of the cell length.
Mat2 derivative_1d() { return {{{-0.5, 0.5}, {-0.5, 0.5}}}; }

Eigen::Matrix4d tensor(const Mat2& along_x, const Mat2& along_y) {
  Eigen::Matrix4d m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      m(a, b) = along_x[kCornerX[a]][kCornerX[b]] * along_y[kCornerY[a]][kCornerY[b]];
  return m;
}

// Scatter-add of one local matrix over all elements in element order.
SparseMatrix scatter(const Grid& grid, const Eigen::Matrix4d& local) {
  const std::size_t n = grid.node_count();
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(grid.element_count() * 16);
  std::size_t nodes[4];
  for (std::size_t j = 0; j + 1 < grid.ny(); ++j) {
    for (std::size_t i = 0; i + 1 < grid.nx(); ++i) {
      grid.element_nodes(i, j, nodes);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          if (local(a, b) != 0.0)
            triplets.emplace_back(static_cast<int>(nodes[a]), static_cast<int>(nodes[b]),
                                  local(a, b));
    }
  }
  SparseMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

// (C + C^T) / 2: addition commutes, so the result is bitwise symmetric.
SparseMatrix symmetrized(const SparseMatrix& c) {
  SparseMatrix t = c.transpose();
  SparseMatrix s = (c + t) * 0.5;
  s.makeCompressed();
  return s;
}

void check_spacing(double hx, double hy) {
  if (!(hx > 0.0) || !(hy > 0.0)) {
    std::ostringstream msg;
    msg << "element spacings must be positive, got hx=" << hx << " hy=" << hy;
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

ElementMatrices local_matrices(double hx, double hy) {
  check_spacing(hx, hy);
  ElementMatrices e;
  e.stiffness = tensor(stiffness_1d(hx), mass_1d(hy)) + tensor(mass_1d(hx), stiffness_1d(hy));
  const Eigen::Vector4d s(1.0, -1.0, 1.0, -1.0);
  e.mixed = (s * s.transpose()) / (hx * hy);
  e.lumped_mass = Eigen::Matrix4d::Identity() * (hx * hy / 4.0);
  return e;
}

SparseMatrix assemble_stiffness(const Grid& grid) {
  return scatter(grid, local_matrices(grid.hx(), grid.hy()).stiffness);
}

SparseMatrix assemble_mixed(const Grid& grid) {
  return scatter(grid, local_matrices(grid.hx(), grid.hy()).mixed);
}

SparseMatrix assemble_lumped_mass(const Grid& grid) {
  return scatter(grid, local_matrices(grid.hx(), grid.hy()).lumped_mass);
}

namespace {

Vector inverse_diagonal(const SparseMatrix& d) {
  Vector inv(d.rows());
  for (int k = 0; k < d.rows(); ++k) inv[k] = 1.0 / d.coeff(k, k);
  return inv;
}

}  // namespace

SparseMatrix assemble_biharmonic(const Grid& grid) {
  const SparseMatrix k = assemble_stiffness(grid);
  const Vector d_inv = inverse_diagonal(assemble_lumped_mass(grid));
  const SparseMatrix scaled = d_inv.asDiagonal() * k;
  return symmetrized(SparseMatrix(k * scaled));
}

SparseMatrix assemble_weak_derivative(const Grid& grid, Axis axis) {
  const double hx = grid.hx();
  const double hy = grid.hy();
  check_spacing(hx, hy);
  const Eigen::Matrix4d local = axis == Axis::X ? tensor(derivative_1d(), lumped_mass_1d(hy))
                                                : tensor(lumped_mass_1d(hx), derivative_1d());
  return scatter(grid, local);
}

SparseMatrix assemble_recovered_hessian(const Grid& grid) {
  const SparseMatrix k = assemble_stiffness(grid);
  const Vector d_inv = inverse_diagonal(assemble_lumped_mass(grid));
  SparseMatrix total(k.rows(), k.cols());
  for (Axis axis : {Axis::X, Axis::Y}) {
    const SparseMatrix recovery = d_inv.asDiagonal() * assemble_weak_derivative(grid, axis);
    const SparseMatrix rt = recovery.transpose();
    total += SparseMatrix(rt * SparseMatrix(k * recovery));
  }
  return symmetrized(total);
}

namespace {

SparseMatrix assemble_1d(std::size_t n, const Mat2& local) {
  std::vector<Eigen::Triplet<double, int>> t;
  for (std::size_t e = 0; e + 1 < n; ++e)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        if (local[a][b] != 0.0)
          t.emplace_back(static_cast<int>(e + a), static_cast<int>(e + b), local[a][b]);
  SparseMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Vector lumped_1d(std::size_t n, double h) {
  Vector m = Vector::Constant(static_cast<Eigen::Index>(n), h);
  m[0] = m[static_cast<Eigen::Index>(n) - 1] = h / 2.0;
  return m;
}

// Second-derivative energy along one axis: S^T diag(interior / m) S.
SparseMatrix line_energy(std::size_t n, double h) {
  const SparseMatrix s = assemble_1d(n, stiffness_1d(h));
  const Vector m = lumped_1d(n, h);
  Vector w = m.cwiseInverse();
  w[0] = w[static_cast<Eigen::Index>(n) - 1] = 0.0;
  const SparseMatrix st = s.transpose();
  return SparseMatrix(st * (w.asDiagonal() * s));
}

// Node (i, j) -> j * nx + i, so the y factor is the outer one.
SparseMatrix kron(const SparseMatrix& outer_y, const SparseMatrix& inner_x) {
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(static_cast<std::size_t>(outer_y.nonZeros() * inner_x.nonZeros()));
  const int nx = static_cast<int>(inner_x.rows());
  for (int r = 0; r < outer_y.outerSize(); ++r)
    for (SparseMatrix::InnerIterator a(outer_y, r); a; ++a)
      for (int q = 0; q < inner_x.outerSize(); ++q)
        for (SparseMatrix::InnerIterator b(inner_x, q); b; ++b)
          t.emplace_back(static_cast<int>(a.row()) * nx + static_cast<int>(b.row()),
                         static_cast<int>(a.col()) * nx + static_cast<int>(b.col()),
                         a.value() * b.value());
  SparseMatrix m(static_cast<int>(outer_y.rows()) * nx, static_cast<int>(outer_y.cols()) * nx);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix diagonal(const Vector& d) {
  SparseMatrix m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Eigen::Index k = 0; k < d.size(); ++k) m.insert(k, k) = d[k];
  return m;
}

}  // namespace

SparseMatrix assemble_thin_plate(const Grid& grid) {
  const double hx = grid.hx();
  const double hy = grid.hy();
  check_spacing(hx, hy);
  const SparseMatrix along_x = kron(diagonal(lumped_1d(grid.ny(), hy)), line_energy(grid.nx(), hx));
  const SparseMatrix along_y = kron(line_energy(grid.ny(), hy), diagonal(lumped_1d(grid.nx(), hx)));
  SparseMatrix total = along_x + along_y;
  total += 2.0 * assemble_mixed(grid);
  return symmetrized(total);
}

SparseMatrix assemble_point_eval(const Grid& grid, std::span<const Point> points) {
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(points.size() * 4);
  std::size_t nodes[4];
  for (std::size_t r = 0; r < points.size(); ++r) {
    const Point p = points[r];
    if (!grid.domain().contains(p)) {
      std::ostringstream msg;
      msg << "data point " << r << " at (" << p.x << ", " << p.y << ") lies outside the domain";
      throw OutOfDomain(msg.str(), r);
    }
    const Location loc = grid.locate(p);
    grid.element_nodes(loc.i, loc.j, nodes);
    const double w[4] = {(1.0 - loc.xi) * (1.0 - loc.eta), loc.xi * (1.0 - loc.eta),
                         loc.xi * loc.eta, (1.0 - loc.xi) * loc.eta};
    for (int a = 0; a < 4; ++a)
      if (w[a] != 0.0)
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(nodes[a]), w[a]);
  }
  SparseMatrix a(static_cast<int>(points.size()), static_cast<int>(grid.node_count()));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

}  // namespace lspline

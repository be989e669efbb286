#pragma once

// Brute-force reference computations shared by the unit and acceptance tests.
// They reuse nothing from the library beyond the Grid coordinates.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lspline/grid.hpp"
#include "lspline/sparse.hpp"
#include "lspline/system.hpp"

namespace oracle {

using lspline::DenseMatrix;
using lspline::Grid;
using lspline::Point;
using lspline::Vector;

// Q1 basis on one element from its global node coordinates.
struct Basis {
  double x0, y0, hx, hy;
  // Corners (origin, +x, +x+y, +y).
  double value(int a, double x, double y) const {
    const double s = (x - x0) / hx, t = (y - y0) / hy;
    const double fx = (a == 1 || a == 2) ? s : 1.0 - s;
    const double fy = (a == 2 || a == 3) ? t : 1.0 - t;
    return fx * fy;
  }
  double dx(int a, double y) const {
    const double t = (y - y0) / hy;
    const double fy = (a == 2 || a == 3) ? t : 1.0 - t;
    return ((a == 1 || a == 2) ? 1.0 : -1.0) / hx * fy;
  }
  double dy(int a, double x) const {
    const double s = (x - x0) / hx;
    const double fx = (a == 1 || a == 2) ? s : 1.0 - s;
    return ((a == 2 || a == 3) ? 1.0 : -1.0) / hy * fx;
  }
  double dxy(int a) const {
    const double sx = (a == 1 || a == 2) ? 1.0 : -1.0;
    const double sy = (a == 2 || a == 3) ? 1.0 : -1.0;
    return sx * sy / (hx * hy);
  }
};

struct Dense {
  DenseMatrix k, m, mass, d;
};

// 2 x 2 Gauss quadrature per element: exact for every Q1 product.
inline Dense gauss_assembly(const Grid& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Dense out{DenseMatrix::Zero(n, n), DenseMatrix::Zero(n, n), DenseMatrix::Zero(n, n),
            DenseMatrix::Zero(n, n)};
  const double q = 1.0 / std::sqrt(3.0);
  const double gp[2] = {0.5 - 0.5 * q, 0.5 + 0.5 * q};
  for (std::size_t j = 0; j + 1 < g.ny(); ++j) {
    for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
      const Basis b{g.x(i), g.y(j), g.hx(), g.hy()};
      const std::size_t nodes[4] = {j * g.nx() + i, j * g.nx() + i + 1, (j + 1) * g.nx() + i + 1,
                                    (j + 1) * g.nx() + i};
      const double w = g.hx() * g.hy() / 4.0;
      for (double sx : gp) {
        for (double sy : gp) {
          const double x = b.x0 + sx * b.hx, y = b.y0 + sy * b.hy;
          for (int a = 0; a < 4; ++a) {
            for (int c = 0; c < 4; ++c) {
              const auto r = static_cast<Eigen::Index>(nodes[a]);
              const auto s = static_cast<Eigen::Index>(nodes[c]);
              out.k(r, s) += w * (b.dx(a, y) * b.dx(c, y) + b.dy(a, x) * b.dy(c, x));
              out.m(r, s) += w * b.dxy(a) * b.dxy(c);
              out.mass(r, s) += w * b.value(a, x, y) * b.value(c, x, y);
            }
          }
        }
      }
    }
  }
  for (Eigen::Index r = 0; r < n; ++r) out.d(r, r) = out.mass.row(r).sum();
  return out;
}

// First element in index order whose closed rectangle holds p.
inline std::size_t brute_locate(const Grid& g, Point p) {
  for (std::size_t j = 0; j + 1 < g.ny(); ++j)
    for (std::size_t i = 0; i + 1 < g.nx(); ++i)
      if (p.x >= g.x(i) && p.x <= g.x(i + 1) && p.y >= g.y(j) && p.y <= g.y(j + 1))
        return g.element_index(i, j);
  return static_cast<std::size_t>(-1);
}

// Dense A from the basis formulas.
inline DenseMatrix point_eval(const Grid& g, const std::vector<Point>& pts) {
  DenseMatrix a = DenseMatrix::Zero(static_cast<Eigen::Index>(pts.size()),
                                    static_cast<Eigen::Index>(g.node_count()));
  for (std::size_t r = 0; r < pts.size(); ++r) {
    const std::size_t e = brute_locate(g, pts[r]);
    const std::size_t i = e % (g.nx() - 1), j = e / (g.nx() - 1);
    const Basis b{g.x(i), g.y(j), g.hx(), g.hy()};
    const std::size_t nodes[4] = {j * g.nx() + i, j * g.nx() + i + 1, (j + 1) * g.nx() + i + 1,
                                  (j + 1) * g.nx() + i};
    for (int c = 0; c < 4; ++c)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(nodes[c])) +=
          b.value(c, pts[r].x, pts[r].y);
  }
  return a;
}

// trace(A H^-1 A^T) by dense factorization.
inline double exact_trace(const lspline::SmoothingSystem& system, double lambda) {
  const DenseMatrix h = lspline::dense_normal_matrix(system, lambda);
  const DenseMatrix a = DenseMatrix(system.point_eval());
  const DenseMatrix x = h.llt().solve(a.transpose());
  return (a * x).trace();
}

// Uniform random points inside the grid's domain.
inline std::vector<Point> random_points(const Grid& g, std::size_t count, std::mt19937_64& rng) {
  const auto& d = g.domain();
  std::uniform_real_distribution<double> ux(d.x_min, d.x_max), uy(d.y_min, d.y_max);
  std::vector<Point> pts(count);
  for (auto& p : pts) p = {ux(rng), uy(rng)};
  return pts;
}

}  // namespace oracle

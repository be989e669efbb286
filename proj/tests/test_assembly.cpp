#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "lspline/assembly.hpp"
#include "lspline/error.hpp"
#include "oracle.hpp"

using namespace lspline;

namespace {

double max_abs(const DenseMatrix& m) { return m.cwiseAbs().maxCoeff(); }

Vector nodal(const Grid& g, double (*f)(double, double)) {
  Vector v(static_cast<Eigen::Index>(g.node_count()));
  for (std::size_t k = 0; k < g.node_count(); ++k) v[static_cast<Eigen::Index>(k)] = f(g.node(k).x, g.node(k).y);
  return v;
}

std::vector<Grid> small_grids() {
  return {make_image_grid(2, 2), make_image_grid(3, 3), make_image_grid(4, 5),
          Grid(Domain2{-1.0, 2.0, 0.0, 0.5}, 5, 5), Grid(Domain2{0.0, 0.3, -2.0, 1.0}, 5, 3)};
}

}  // namespace

TEST(LocalMatrices, UnitSquareMatchesQuadrature) {
  const ElementMatrices e = local_matrices(1.0, 1.0);
  const auto dense = oracle::gauss_assembly(make_image_grid(2, 2));
  for (int a = 0; a < 4; ++a) EXPECT_DOUBLE_EQ(e.stiffness(a, a), e.stiffness(0, 0));
  // Node order of the 2 x 2 grid: 0, 1, 3, 2 in local corner order.
  const int map[4] = {0, 1, 3, 2};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      EXPECT_NEAR(e.stiffness(a, b), dense.k(map[a], map[b]), 1e-14);
      EXPECT_NEAR(e.mixed(a, b), dense.m(map[a], map[b]), 1e-14);
    }
}

TEST(LocalMatrices, ConstantsInNullSpace) {
  for (auto [hx, hy] : {std::pair{1.0, 1.0}, std::pair{0.1, 3.0}, std::pair{2.0 / 19.0, 2.0 / 19.0}}) {
    const ElementMatrices e = local_matrices(hx, hy);
    EXPECT_LT((e.stiffness * Eigen::Vector4d::Ones()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((e.mixed * Eigen::Vector4d::Ones()).cwiseAbs().maxCoeff(), 1e-12);
    const Eigen::Vector4d s(1.0, -1.0, 1.0, -1.0);
    EXPECT_LT(max_abs(e.mixed - s * s.transpose() / (hx * hy)), 1e-12);
    EXPECT_NEAR(e.lumped_mass.trace(), hx * hy, 1e-15);
    for (int a = 0; a < 4; ++a) EXPECT_DOUBLE_EQ(e.lumped_mass(a, a), hx * hy / 4.0);
  }
}

TEST(LocalMatrices, RejectsNonpositiveSpacing) {
  EXPECT_THROW(local_matrices(0.0, 1.0), InvalidArgument);
  EXPECT_THROW(local_matrices(1.0, -1.0), InvalidArgument);
}

TEST(Assembly, MatchesGaussQuadrature) {
  for (const Grid& g : small_grids()) {
    const auto dense = oracle::gauss_assembly(g);
    EXPECT_LT(max_abs(DenseMatrix(assemble_stiffness(g)) - dense.k), 1e-12);
    EXPECT_LT(max_abs(DenseMatrix(assemble_mixed(g)) - dense.m), 1e-12);
    EXPECT_LT(max_abs(DenseMatrix(assemble_lumped_mass(g)) - dense.d), 1e-12);
  }
}

TEST(Assembly, ExactSymmetryAndZeroRowSums) {
  for (const Grid& g : small_grids()) {
    for (const SparseMatrix& m : {assemble_stiffness(g), assemble_mixed(g), assemble_biharmonic(g),
                                  assemble_thin_plate(g), assemble_recovered_hessian(g)}) {
      EXPECT_TRUE(is_exactly_symmetric(m));
      const Vector ones = Vector::Ones(m.cols());
      EXPECT_LT((m * ones).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, max_abs(DenseMatrix(m))));
    }
  }
}

TEST(Assembly, StiffnessTwoByTwoHasRankThree) {
  const DenseMatrix k(assemble_stiffness(make_image_grid(2, 2)));
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(k);
  EXPECT_NEAR(es.eigenvalues()[0], 0.0, 1e-12);
  EXPECT_GT(es.eigenvalues()[1], 1e-3);
}

TEST(Assembly, MixedAnnihilatesAffine) {
  const Grid g(Domain2{-1.0, 2.0, 0.0, 0.5}, 6, 4);
  const SparseMatrix m = assemble_mixed(g);
  EXPECT_LT((m * nodal(g, [](double x, double) { return x; })).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((m * nodal(g, [](double, double y) { return y; })).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((m * nodal(g, [](double x, double y) { return 1.0 + 2.0 * x - 3.0 * y; })).cwiseAbs().maxCoeff(),
            1e-10);
}

TEST(Assembly, MixedEnergyOfXyIsArea) {
  for (const Grid& g : {make_image_grid(5, 5), Grid(Domain2{-1.0, 2.0, 0.0, 0.5}, 7, 4)}) {
    const Vector u = nodal(g, [](double x, double y) { return x * y; });
    EXPECT_NEAR(u.dot(assemble_mixed(g) * u), g.domain().area(), 1e-10);
  }
}

TEST(Assembly, StiffnessEnergyOfXy) {
  // On [0,1]^2 the Q1 interpolant of xy is exact: int y^2 + x^2 = 2/3.
  const Grid g = make_image_grid(6, 6);
  const Vector u = nodal(g, [](double x, double y) { return x * y; });
  const auto dense = oracle::gauss_assembly(g);
  EXPECT_NEAR(u.dot(assemble_stiffness(g) * u), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(u.dot(dense.k * u), 2.0 / 3.0, 1e-12);
}

TEST(Assembly, LumpedMassValues) {
  const DenseMatrix d2(assemble_lumped_mass(make_image_grid(2, 2)));
  for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(d2(k, k), 0.25);
  const DenseMatrix d3(assemble_lumped_mass(make_image_grid(3, 3)));
  EXPECT_DOUBLE_EQ(d3(0, 0), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(d3(1, 1), 1.0 / 8.0);
  EXPECT_DOUBLE_EQ(d3(4, 4), 1.0 / 4.0);
  for (const Grid& g : {make_image_grid(7, 3), make_image_grid(20, 20)})
    EXPECT_NEAR(DenseMatrix(assemble_lumped_mass(g)).trace(), 1.0, 1e-12);
  EXPECT_EQ(assemble_lumped_mass(make_image_grid(4, 4)).nonZeros(), 16);
}

TEST(Assembly, BiharmonicIsKDinvK) {
  for (const Grid& g : small_grids()) {
    const DenseMatrix k(assemble_stiffness(g));
    const DenseMatrix d(assemble_lumped_mass(g));
    const DenseMatrix b = k * d.diagonal().cwiseInverse().asDiagonal() * k;
    EXPECT_LT(max_abs(DenseMatrix(assemble_biharmonic(g)) - b), 1e-10 * max_abs(b));
  }
}

TEST(Assembly, BiharmonicEnergyIsLaplacianNorm) {
  const Grid g = make_image_grid(5, 6);
  const SparseMatrix b = assemble_biharmonic(g);
  const DenseMatrix k(assemble_stiffness(g));
  const Vector dinv_sqrt = DenseMatrix(assemble_lumped_mass(g)).diagonal().cwiseSqrt().cwiseInverse();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 100; ++t) {
    Vector v(b.cols());
    for (auto& x : v) x = n01(rng);
    const double energy = v.dot(b * v);
    EXPECT_GE(energy, 0.0);
    EXPECT_NEAR(energy, (dinv_sqrt.asDiagonal() * (k * v)).squaredNorm(), 1e-9 * energy);
  }
}

TEST(Assembly, ThinPlateNullSpaceIsAffine) {
  const Grid g(Domain2{-1.0, 2.0, 0.0, 0.5}, 7, 5);
  for (const SparseMatrix& p : {assemble_thin_plate(g), assemble_recovered_hessian(g)}) {
    const double scale = max_abs(DenseMatrix(p));
    EXPECT_LT((p * nodal(g, [](double x, double y) { return 1.0 + 2.0 * x - 3.0 * y; })).cwiseAbs().maxCoeff(),
              1e-12 * scale);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es{DenseMatrix(p)};
    EXPECT_GT(es.eigenvalues()[0], -1e-10 * scale);
    EXPECT_LT(std::abs(es.eigenvalues()[2]), 1e-10 * scale);
    EXPECT_GT(es.eigenvalues()[3], 1e-8 * scale);
  }
}

TEST(Assembly, ThinPlateEnergyOfQuadratics) {
  // x^2: u_xx = 2 is recovered exactly at interior nodes, weighted by the
  // lumped mass of the interior columns (total 1 - hx on the unit square).
  const Grid g = make_image_grid(9, 11);
  const SparseMatrix p = assemble_thin_plate(g);
  const Vector xx = nodal(g, [](double x, double) { return x * x; });
  EXPECT_NEAR(xx.dot(p * xx), 4.0 * (1.0 - g.hx()), 1e-10);
  // xy: only the mixed part, counted twice.
  const Vector xy = nodal(g, [](double x, double y) { return x * y; });
  EXPECT_NEAR(xy.dot(p * xy), 2.0, 1e-10);
}

TEST(Assembly, WeakDerivativeExactOnAffine) {
  const Grid g = make_image_grid(5, 4);
  const Vector d = DenseMatrix(assemble_lumped_mass(g)).diagonal();
  const Vector x = nodal(g, [](double x, double) { return x; });
  const Vector y = nodal(g, [](double, double y) { return y; });
  EXPECT_LT((assemble_weak_derivative(g, Axis::X) * x - d).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((assemble_weak_derivative(g, Axis::Y) * y - d).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PointEval, NodeAndCenterRows) {
  const Grid g = make_image_grid(4, 4);
  const std::vector<Point> pts = {g.node(5), {g.x(1) + 0.5 * g.hx(), g.y(2) + 0.5 * g.hy()}};
  const DenseMatrix a(assemble_point_eval(g, pts));
  EXPECT_DOUBLE_EQ(a(0, 5), 1.0);
  EXPECT_DOUBLE_EQ(a.row(0).sum(), 1.0);
  EXPECT_EQ((a.row(0).array() != 0.0).count(), 1);
  for (std::size_t n : {g.node_index(1, 2), g.node_index(2, 2), g.node_index(2, 3), g.node_index(1, 3)})
    EXPECT_NEAR(a(1, static_cast<Eigen::Index>(n)), 0.25, 1e-15);
}

TEST(PointEval, MatchesBasisOracleAndReproducesAffine) {
  const Grid g(Domain2{-1.0, 2.0, 0.0, 0.5}, 8, 5);
  std::mt19937_64 rng(5);
  const auto pts = oracle::random_points(g, 200, rng);
  const SparseMatrix a = assemble_point_eval(g, pts);
  EXPECT_LT(max_abs(DenseMatrix(a) - oracle::point_eval(g, pts)), 1e-14);
  const Vector affine = nodal(g, [](double x, double y) { return 0.5 - 1.5 * x + 4.0 * y; });
  const Vector values = a * affine;
  for (std::size_t r = 0; r < pts.size(); ++r) {
    EXPECT_NEAR(values[static_cast<Eigen::Index>(r)], 0.5 - 1.5 * pts[r].x + 4.0 * pts[r].y, 1e-12);
    const auto row = DenseMatrix(a).row(static_cast<Eigen::Index>(r));
    EXPECT_NEAR(row.sum(), 1.0, 1e-12);
    EXPECT_GE(row.minCoeff(), 0.0);
    EXPECT_LE((row.array() != 0.0).count(), 4);
  }
}

TEST(PointEval, OutOfDomainNamesIndex) {
  const Grid g = make_image_grid(3, 3);
  const std::vector<Point> pts = {{0.5, 0.5}, {0.2, 0.1}, {1.5, 0.5}};
  try {
    assemble_point_eval(g, pts);
    FAIL();
  } catch (const OutOfDomain& e) {
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(MatrixMarket, CoordinateFormat) {
  SparseMatrix m(2, 3);
  m.insert(0, 1) = 2.5;
  m.insert(1, 2) = -1.0;
  std::ostringstream out;
  write_matrix_market(m, out);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("%%MatrixMarket matrix coordinate real general", 0), 0u);
  EXPECT_NE(text.find("2 3 2"), std::string::npos);
  EXPECT_NE(text.find("1 2 2.5"), std::string::npos);
  EXPECT_NE(text.find("2 3 -1"), std::string::npos);
}

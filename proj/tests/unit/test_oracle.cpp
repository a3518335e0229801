#include "slowcv/error.hpp"
#include "slowcv/generator.hpp"
#include "slowcv/pca.hpp"
#include "slowcv/losses.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace slowcv;
using namespace slowcv::oracle;

namespace {

Grid2D ou_grid(int n, double beta = 1.0) {
  const auto p = Potential::quadratic_ou();
  return Grid2D(p.default_domain(), n, n, p, Thermo(beta));
}

Grid2D ex1_grid(int n) {
  const auto p = Potential::example1();
  return Grid2D(p.default_domain(), n, n, p, Thermo(4.0));
}

SmoothFunction linear(double a1, double a2) {
  return {[=](const Point2& x) { return a1 * x[0] + a2 * x[1]; }, [=](const Point2&) { return Point2(a1, a2); },
          [](const Point2&) { return Matrix2(Matrix2::Zero()); }};
}

}  // namespace

TEST(Grid, WeightsNormalised) {
  const auto g = ex1_grid(41);
  EXPECT_NEAR(g.weights().sum(), 1.0, 1e-12);
  EXPECT_GT(g.weights().minCoeff(), 0.0);
  EXPECT_EQ(g.node(g.index(3, 5)), g.node(std::size_t{5 * 41 + 3}));
  EXPECT_THROW(Grid2D(Domain{}, 2, 5, Potential::quadratic_ou(), Thermo(1.0)), Error);
}

TEST(Grid, InterpolationExactForBilinear) {
  const auto g = ou_grid(11);
  const auto f = sample(g, [](const Point2& x) { return 1 + 2 * x[0] - x[1] + 0.5 * x[0] * x[1]; });
  const Point2 x(0.33, -1.7);
  EXPECT_NEAR(interpolate(g, f, x), 1 + 2 * 0.33 + 1.7 - 0.5 * 0.33 * 1.7, 1e-12);
  const Point2 gr = interpolate_gradient(g, f, x);
  EXPECT_NEAR(gr[0], 2 + 0.5 * x[1], 1e-12);
  EXPECT_NEAR(gr[1], -1 + 0.5 * x[0], 1e-12);
}

TEST(Grid, InvariantSamplesFollowWeights) {
  const auto g = ou_grid(81, 2.0);
  const auto pts = sample_invariant(g, 100000, 3);
  double s = 0;
  for (const auto& p : pts) s += p.squaredNorm();
  // Var = 1/beta per coordinate plus h^2/12 from the in-cell offset.
  EXPECT_NEAR(s / (2.0 * pts.size()), 0.5 + g.h1() * g.h1() / 12, 0.01);
}

TEST(Generator, ConstantsInKernel) {
  const auto g = ex1_grid(61);
  const auto op = fd_generator(g);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.size()));
  const double scale = op.stiffness.coeffs().cwiseAbs().maxCoeff();
  EXPECT_LE((op.stiffness * one).cwiseAbs().maxCoeff(), 1e-12 * scale);
}

TEST(Generator, WeightedSymmetry) {
  const auto g = ex1_grid(41);
  const auto op = fd_generator(g);
  const auto m = op.operator_matrix();
  const Eigen::SparseMatrix<double> mt = m.transpose();
  double worst = 0;
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, c); it; ++it) {
      const double wij = g.weights()[it.row()] * it.value();
      const double wji = g.weights()[it.col()] * m.coeff(it.col(), it.row());
      worst = std::max(worst, std::abs(wij - wji));
    }
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Generator, OrnsteinUhlenbeckSpectrum) {
  const auto g = ou_grid(101);
  const auto e = leading_eigs(fd_generator(g), g, 4);
  EXPECT_LE(std::abs(e.values[0]), 1e-8);
  EXPECT_NEAR(e.values[1], 1.0, 0.02);
  EXPECT_NEAR(e.values[2], 1.0, 0.02);
  EXPECT_NEAR(e.values[3], 2.0, 0.06);
  EXPECT_LE(e.max_residual, 1e-10);
}

TEST(Generator, EigenvectorsOrthonormalAndSigned) {
  const auto g = ex1_grid(81);
  const auto op = fd_generator(g);
  const auto e = leading_eigs(op, g, 3);
  const Eigen::MatrixXd gram = e.vectors.transpose() * g.weights().asDiagonal() * e.vectors;
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-8);
  for (int j = 0; j < 3; ++j) {
    EXPECT_GE(e.values[j], -1e-10);
    if (j) EXPECT_GE(e.values[j], e.values[j - 1]);
    EXPECT_GE(e.vectors(static_cast<Eigen::Index>(g.nearest({1.0, 0.0})), j), 0.0);
  }
  const Eigen::VectorXd phi0 = e.vectors.col(0);
  EXPECT_LE((phi0.array() - phi0.mean()).abs().maxCoeff(), 1e-6);
  EXPECT_LT(e.vectors(static_cast<Eigen::Index>(g.nearest({-1.0, 0.0})), 1) *
                e.vectors(static_cast<Eigen::Index>(g.nearest({1.0, 0.0})), 1),
            0.0);
}

TEST(Generator, Example1GoldenValue) {
  // Frozen after refinement: 81^2 0.0246596, 161^2 0.0246601, 321^2 0.0246603.
  const auto g = ex1_grid(161);
  const auto e = leading_eigs(fd_generator(g), g, 3);
  EXPECT_NEAR(e.values[1], 0.0246601, 1e-6);
}

TEST(Generator, RejectsTooManyEigenpairs) {
  const auto g = ou_grid(11);
  EXPECT_THROW((void)leading_eigs(fd_generator(g), g, 13), Error);
}

TEST(Energy, ConstantAndLinear) {
  const auto g = ou_grid(201);
  EXPECT_EQ(energy_generator(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.size()), 3.0), g), 0.0);
  const auto x1 = sample(g, [](const Point2& x) { return x[0]; });
  EXPECT_NEAR(energy_generator(x1, g), 1.0, 1e-3);
}

TEST(Energy, MatchesQuadraticFormAndRayleighQuotient) {
  const auto g = ex1_grid(81);
  const auto op = fd_generator(g);
  const auto f = sample(g, [](const Point2& x) { return std::sin(x[0]) * x[1]; });
  const double quad = f.dot(op.stiffness * f);
  EXPECT_NEAR(energy_generator(f, g), quad, 1e-10 * std::max(1.0, quad));
  const auto e = leading_eigs(op, g, 2);
  const Eigen::VectorXd phi = e.vectors.col(1);
  EXPECT_NEAR(energy_generator(phi, g) / weighted_variance(g, phi), e.values[1], 1e-8);
}

TEST(Bochner, LinearOnOrnsteinUhlenbeck) {
  for (double beta : {1.0, 2.0}) {
    const auto g = ou_grid(201, beta);
    const auto c = bochner_check(g, linear(0.3, -0.7));
    const double exact = 0.58 / beta;
    EXPECT_NEAR(c.rhs, exact, 1e-12);
    EXPECT_LE(std::abs(c.lhs - exact) / exact, 1e-3) << beta;
    EXPECT_LE(c.error, 1e-3);
  }
}

TEST(Bochner, ConstantIsZero) {
  const auto g = ex1_grid(41);
  const auto c = bochner_check(g, linear(0, 0));
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_EQ(c.rhs, 0.0);
  EXPECT_EQ(c.error, 0.0);
}

TEST(Slowness, EigenfunctionTerms) {
  const auto g = ex1_grid(81);
  const auto op = fd_generator(g);
  const auto e = leading_eigs(op, g, 2);
  const std::vector<GridFunction> xi{e.vectors.col(1)};
  const std::vector<double> w{1.0};
  const auto t = slowness_objective(xi, g, op, w);
  const double l1 = e.values[1];
  EXPECT_NEAR(t.drift / (l1 * l1), 1.0, 1e-6);
  EXPECT_NEAR(t.diffusion / (4.0 * l1), 1.0, 1e-6);
}

TEST(Slowness, ScaleAndShiftInvariant) {
  const auto g = ex1_grid(41);
  const auto op = fd_generator(g);
  const auto f = sample(g, [](const Point2& x) { return x[0] + 0.1 * x[1] * x[1]; });
  const std::vector<double> w{1.0};
  const std::vector<GridFunction> a{f}, b{GridFunction(3.0 * f.array() + 7.0)};
  EXPECT_NEAR(slowness_objective(a, g, op, w).total, slowness_objective(b, g, op, w).total, 1e-9);
}

TEST(Slowness, DegenerateFamilies) {
  const auto g = ex1_grid(41);
  const auto op = fd_generator(g);
  const auto f = sample(g, [](const Point2& x) { return x[0]; });
  const std::vector<double> w1{1.0}, w2{1.0, 0.5};
  try {
    (void)slowness_objective(std::vector<GridFunction>{GridFunction::Constant(f.size(), 2.0)}, g, op, w1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_family);
  }
  EXPECT_THROW((void)slowness_objective(std::vector<GridFunction>{f, GridFunction(2.0 * f)}, g, op, w2), Error);
}

TEST(Pca, HandCases) {
  const std::vector<Point2> line{{1, 0}, {-1, 0}, {2, 0}};
  EXPECT_NEAR(pca(line, 1).residual, 0.0, 1e-15);
  const std::vector<Point2> square{{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  const auto p = pca(square, 1);
  EXPECT_NEAR(p.residual, 4.0, 1e-12);
  EXPECT_NEAR(p.eigenvalues[0], 1.0, 1e-12);
  EXPECT_NEAR(p.eigenvalues[1], 1.0, 1e-12);
  EXPECT_THROW((void)pca(std::vector<Point2>{{0, 0}}, 1), Error);
}

TEST(Pca, ResidualIsTrailingEigenvalueAndLinearAutoencoder) {
  Rng rng(4);
  std::vector<Point2> pts;
  for (int i = 0; i < 500; ++i) {
    const auto [a, b] = rng.gaussian_pair();
    pts.emplace_back(3 + 2 * a + 0.3 * b, -1 + a - 0.5 * b);
  }
  const auto p = pca(pts, 1);
  EXPECT_NEAR(p.residual, 500 * p.eigenvalues[1], 1e-10 * p.residual);
  const auto [enc, dec] = linear_autoencoder(p);
  EXPECT_NEAR(ae_loss(enc, dec, pts) * 500, p.residual, 1e-8);
  EXPECT_NEAR(pca(pts, 2).residual, 0.0, 1e-10);
}

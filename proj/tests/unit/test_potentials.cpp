#include "slowcv/error.hpp"
#include "slowcv/potentials.hpp"
#include "slowcv/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace slowcv;

namespace {

// Independent reference formulas, written out directly.
double v_example1(double x1, double x2) {
  return std::pow(x1 * x1 - 1.0, 2) + 2.0 * std::pow(x1 * x1 + x2 - 1.0, 2);
}

double v_example2(double x1, double x2) {
  return std::exp(1.5 * x2 * x2) / (1.0 + std::exp(5.0 * (x1 * x1 - 1.0))) -
         4.0 * std::exp(-4.0 * std::pow(x1 - 2.0, 2) - 0.4 * x2 * x2) -
         5.0 * std::exp(-4.0 * std::pow(x1 + 2.0, 2) - 0.4 * x2 * x2) + 0.2 * (std::pow(x1, 4) + std::pow(x2, 4)) +
         0.5 * std::exp(-2.0 * x1 * x1);
}

Point2 fd_gradient(const Potential& p, const Point2& x, double h = 1e-5) {
  Point2 g;
  for (int i = 0; i < 2; ++i) {
    Point2 a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (p.value(a) - p.value(b)) / (2.0 * h);
  }
  return g;
}

Matrix2 fd_hessian(const Potential& p, const Point2& x, double h = 1e-5) {
  Matrix2 m;
  for (int i = 0; i < 2; ++i) {
    Point2 a = x, b = x;
    a[i] += h;
    b[i] -= h;
    m.col(i) = (p.gradient(a) - p.gradient(b)) / (2.0 * h);
  }
  return m;
}

}  // namespace

TEST(Potentials, Example1ValuesMatchFormula) {
  const auto p = Potential::example1();
  EXPECT_DOUBLE_EQ(p.value({1.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(p.value({-1.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(p.value({0.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(p.value({0.0, 0.0}), 3.0);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.uniform(-2, 2), b = rng.uniform(-1.5, 2.5);
    EXPECT_NEAR(p.value({a, b}), v_example1(a, b), 1e-12 * (1 + v_example1(a, b)));
  }
}

TEST(Potentials, Example1HessianAtMinimum) {
  const Matrix2 h = Potential::example1().hessian({1.0, 0.0});
  EXPECT_DOUBLE_EQ(h(0, 0), 24.0);
  EXPECT_DOUBLE_EQ(h(0, 1), 8.0);
  EXPECT_DOUBLE_EQ(h(1, 0), 8.0);
  EXPECT_DOUBLE_EQ(h(1, 1), 4.0);
}

TEST(Potentials, Example2ValuesMatchFormula) {
  const auto p = Potential::example2();
  EXPECT_NEAR(p.value({0.0, 0.0}), v_example2(0.0, 0.0), 1e-13);
  EXPECT_NEAR(p.value({0.0, 0.0}), 1.4933, 1e-4);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.uniform(-3.5, 3.5), b = rng.uniform(-2.5, 2.5);
    EXPECT_NEAR(p.value({a, b}), v_example2(a, b), 1e-10 * (1 + std::abs(v_example2(a, b))));
  }
}

TEST(Potentials, GradientsAndHessiansMatchFiniteDifferences) {
  for (const auto& p : {Potential::example1(), Potential::example1(0.2), Potential::example2(), Potential::quadratic_ou()}) {
    const Domain d = p.default_domain();
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      const Point2 x(rng.uniform(d.x1_min, d.x1_max), rng.uniform(d.x2_min, d.x2_max));
      const Point2 g = p.gradient(x);
      const Point2 gf = fd_gradient(p, x);
      EXPECT_LE((g - gf).norm(), 1e-6 * (1 + g.norm())) << p.name() << " at " << x.transpose();
      const Matrix2 h = p.hessian(x);
      EXPECT_LE((h - fd_hessian(p, x)).norm(), 1e-6 * (1 + h.norm())) << p.name() << " at " << x.transpose();
      EXPECT_DOUBLE_EQ(h(0, 1), h(1, 0));
    }
  }
}

TEST(Potentials, Example2HessianStableFarOut) {
  const Matrix2 h = Potential::example2().hessian({3.4, 2.4});
  EXPECT_TRUE(h.allFinite());
}

TEST(Potentials, FromName) {
  EXPECT_EQ(Potential::from_name("example2").kind(), PotentialKind::example2);
  EXPECT_DOUBLE_EQ(Potential::from_name("example1", 0.25).epsilon(), 0.25);
  try {
    (void)Potential::from_name("muller_brown");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config);
  }
  EXPECT_THROW((void)Potential::example1(0.0), Error);
}

TEST(Potentials, ThermoRejectsNonPositiveBeta) {
  EXPECT_THROW(Thermo(0.0), Error);
  EXPECT_THROW(Thermo(-1.0), Error);
  EXPECT_THROW(Thermo(NAN), Error);
  EXPECT_DOUBLE_EQ(Thermo(4.0).beta, 4.0);
}

// Relative Boltzmann weight on the boundary of each reference domain. The
// Example1 channel leaves through the bottom edge near x1 = +-sqrt(2), where
// V = 1.5, so that domain only reaches exp(-6).
TEST(Potentials, DomainBoundaryWeights) {
  struct Case {
    Potential p;
    double beta;
    double bound;
  };
  const Case cases[] = {{Potential::example1(), 4.0, 2.5e-3}, {Potential::example2(), 1.5, 1e-6},
                        {Potential::quadratic_ou(), 1.0, 3.4e-4}};
  for (const auto& [p, beta, bound] : cases) {
    const Domain d = p.default_domain();
    double vmin = INFINITY, vboundary = INFINITY;
    for (int i = 0; i <= 400; ++i) {
      for (int j = 0; j <= 400; ++j) {
        const Point2 x(d.x1_min + (d.x1_max - d.x1_min) * i / 400.0, d.x2_min + (d.x2_max - d.x2_min) * j / 400.0);
        const double v = p.value(x);
        vmin = std::min(vmin, v);
        if (i == 0 || j == 0 || i == 400 || j == 400) vboundary = std::min(vboundary, v);
      }
    }
    EXPECT_LE(std::exp(-beta * (vboundary - vmin)), bound) << p.name();
  }
}

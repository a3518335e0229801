#include "slowcv/potentials.hpp"

#include "slowcv/error.hpp"

#include <cmath>

namespace slowcv {

namespace {

// Logistic sigmoid, stable for large |u|.
double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

Potential Potential::example1(double epsilon) {
  if (!(epsilon > 0.0)) throw Error(Errc::invalid_argument, "example1 requires epsilon > 0");
  return Potential(PotentialKind::example1, epsilon);
}

Potential Potential::example2() { return Potential(PotentialKind::example2, 0.0); }

Potential Potential::quadratic_ou() { return Potential(PotentialKind::quadratic_ou, 0.0); }

Potential Potential::from_name(const std::string& name, double epsilon) {
  if (name == "example1") return example1(epsilon);
  if (name == "example2") return example2();
  if (name == "quadratic_ou") return quadratic_ou();
  throw Error(Errc::config, "unknown potential '" + name + "'");
}

std::string Potential::name() const {
  switch (kind_) {
    case PotentialKind::example1: return "example1";
    case PotentialKind::example2: return "example2";
    case PotentialKind::quadratic_ou: return "quadratic_ou";
  }
  return "";
}

double Potential::value(const Point2& x) const {
  const double x1 = x[0];
  const double x2 = x[1];
  switch (kind_) {
    case PotentialKind::example1: {
      const double a = x1 * x1 - 1.0;
      const double c = x1 * x1 + x2 - 1.0;
      return a * a + c * c / epsilon_;
    }
    case PotentialKind::example2: {
      const double r = sigmoid(-5.0 * (x1 * x1 - 1.0));
      const double g = std::exp(1.5 * x2 * x2);
      const double b = -4.0 * std::exp(-4.0 * (x1 - 2.0) * (x1 - 2.0) - 0.4 * x2 * x2);
      const double c = -5.0 * std::exp(-4.0 * (x1 + 2.0) * (x1 + 2.0) - 0.4 * x2 * x2);
      const double d = 0.2 * (x1 * x1 * x1 * x1 + x2 * x2 * x2 * x2);
      const double e = 0.5 * std::exp(-2.0 * x1 * x1);
      return g * r + b + c + d + e;
    }
    case PotentialKind::quadratic_ou:
      return 0.5 * x.squaredNorm();
  }
  return 0.0;
}

Point2 Potential::gradient(const Point2& x) const {
  const double x1 = x[0];
  const double x2 = x[1];
  switch (kind_) {
    case PotentialKind::example1: {
      const double a = x1 * x1 - 1.0;
      const double c = x1 * x1 + x2 - 1.0;
      return {4.0 * x1 * a + 4.0 * x1 * c / epsilon_, 2.0 * c / epsilon_};
    }
    case PotentialKind::example2: {
      const double u = 5.0 * (x1 * x1 - 1.0);
      const double r = sigmoid(-u);
      const double p = r * (1.0 - r);
      const double g = std::exp(1.5 * x2 * x2);
      const double b = -4.0 * std::exp(-4.0 * (x1 - 2.0) * (x1 - 2.0) - 0.4 * x2 * x2);
      const double c = -5.0 * std::exp(-4.0 * (x1 + 2.0) * (x1 + 2.0) - 0.4 * x2 * x2);
      const double e = 0.5 * std::exp(-2.0 * x1 * x1);
      const double d1 = -g * p * 10.0 * x1 + b * (-8.0 * (x1 - 2.0)) + c * (-8.0 * (x1 + 2.0)) +
                        0.8 * x1 * x1 * x1 - 4.0 * x1 * e;
      const double d2 = 3.0 * x2 * g * r - 0.8 * x2 * (b + c) + 0.8 * x2 * x2 * x2;
      return {d1, d2};
    }
    case PotentialKind::quadratic_ou:
      return x;
  }
  return Point2::Zero();
}

Matrix2 Potential::hessian(const Point2& x) const {
  const double x1 = x[0];
  const double x2 = x[1];
  Matrix2 h;
  switch (kind_) {
    case PotentialKind::example1: {
      const double c = x1 * x1 + x2 - 1.0;
      const double h11 = 12.0 * x1 * x1 - 4.0 + 4.0 * c / epsilon_ + 8.0 * x1 * x1 / epsilon_;
      const double h12 = 4.0 * x1 / epsilon_;
      h << h11, h12, h12, 2.0 / epsilon_;
      return h;
    }
    case PotentialKind::example2: {
      // Barrier term g(x2) r(x1) with r = sigmoid(-u), u = 5 (x1^2 - 1).
      const double u = 5.0 * (x1 * x1 - 1.0);
      const double r = sigmoid(-u);
      const double p = r * (1.0 - r);
      const double du = 10.0 * x1;
      const double dr = -p * du;
      const double ddr = -(p * (2.0 * r - 1.0) * du * du + p * 10.0);
      const double g = std::exp(1.5 * x2 * x2);
      const double dg = 3.0 * x2 * g;
      const double ddg = (3.0 + 9.0 * x2 * x2) * g;

      // Gaussian wells: W exp(q) with q1 = -8 (x1 -+ 2), q2 = -0.8 x2.
      const double b = -4.0 * std::exp(-4.0 * (x1 - 2.0) * (x1 - 2.0) - 0.4 * x2 * x2);
      const double c = -5.0 * std::exp(-4.0 * (x1 + 2.0) * (x1 + 2.0) - 0.4 * x2 * x2);
      const double qb1 = -8.0 * (x1 - 2.0);
      const double qc1 = -8.0 * (x1 + 2.0);
      const double q2 = -0.8 * x2;
      const double e = 0.5 * std::exp(-2.0 * x1 * x1);

      const double h11 = g * ddr + b * (qb1 * qb1 - 8.0) + c * (qc1 * qc1 - 8.0) + 2.4 * x1 * x1 +
                         (16.0 * x1 * x1 - 4.0) * e;
      const double h12 = dg * dr + b * qb1 * q2 + c * qc1 * q2;
      const double h22 = ddg * r + (b + c) * (q2 * q2 - 0.8) + 2.4 * x2 * x2;
      h << h11, h12, h12, h22;
      return h;
    }
    case PotentialKind::quadratic_ou:
      return Matrix2::Identity();
  }
  return Matrix2::Zero();
}

Domain Potential::default_domain() const {
  switch (kind_) {
    case PotentialKind::example1: return {-2.0, 2.0, -1.5, 2.5};
    case PotentialKind::example2: return {-3.5, 3.5, -2.5, 2.5};
    case PotentialKind::quadratic_ou: return {-4.0, 4.0, -4.0, 4.0};
  }
  return {};
}

Point2 Potential::default_start() const {
  switch (kind_) {
    case PotentialKind::example1: return {1.0, 0.0};
    case PotentialKind::example2: return {2.0, 0.0};
    case PotentialKind::quadratic_ou: return {0.0, 0.0};
  }
  return Point2::Zero();
}

Thermo::Thermo(double b) : beta(b) {
  if (!(b > 0.0) || !std::isfinite(b)) throw Error(Errc::invalid_argument, "beta must be positive and finite");
}

}  // namespace slowcv

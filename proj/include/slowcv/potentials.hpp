#pragma once

#include "slowcv/types.hpp"

#include <string>

namespace slowcv {

enum class PotentialKind { example1, example2, quadratic_ou };

// Closed-form potential landscapes on R^2.
//
//   example1:     V = (x1^2 - 1)^2 + (x1^2 + x2 - 1)^2 / epsilon
//   example2:     V = exp(1.5 x2^2) / (1 + exp(5 (x1^2 - 1)))
//                     - 4 exp(-4 (x1 - 2)^2 - 0.4 x2^2) - 5 exp(-4 (x1 + 2)^2 - 0.4 x2^2)
//                     + 0.2 (x1^4 + x2^4) + 0.5 exp(-2 x1^2)
//   quadratic_ou: V = |x|^2 / 2
//
// Gradients and Hessians are exact closed forms.
class Potential {
 public:
  static Potential example1(double epsilon = 0.5);
  static Potential example2();
  static Potential quadratic_ou();

  // Config names: "example1", "example2", "quadratic_ou".
  static Potential from_name(const std::string& name, double epsilon = 0.5);

  PotentialKind kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  std::string name() const;

  double value(const Point2& x) const;
  Point2 gradient(const Point2& x) const;
  Matrix2 hessian(const Point2& x) const;

  // Default reference grid domain; e^{-beta V} on its boundary is negligible.
  Domain default_domain() const;
  // Default initial condition for trajectories (a well minimum basin).
  Point2 default_start() const;

 private:
  Potential(PotentialKind kind, double epsilon) : kind_(kind), epsilon_(epsilon) {}

  PotentialKind kind_;
  double epsilon_;
};

// Inverse temperature beta = 1 / (k_B T).
struct Thermo {
  double beta;

  explicit Thermo(double b);
};

}  // namespace slowcv

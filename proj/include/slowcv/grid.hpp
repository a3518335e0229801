#pragma once

#include "slowcv/potentials.hpp"
#include "slowcv/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace slowcv::oracle {

// Values at grid nodes, node index = i2 * n1 + i1.
using GridFunction = Eigen::VectorXd;

// Regular node grid over a rectangle with Boltzmann quadrature weights
// (exponents beta (V - Vmin) are capped at 300 so no weight underflows)
// w_i = exp(-beta V(x_i)) / sum_j exp(-beta V(x_j)).
class Grid2D {
 public:
  Grid2D(const Domain& domain, int n1, int n2, const Potential& potential, const Thermo& thermo);

  const Domain& domain() const { return domain_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double h1() const { return h1_; }
  double h2() const { return h2_; }
  std::size_t size() const { return static_cast<std::size_t>(n1_) * static_cast<std::size_t>(n2_); }
  std::size_t index(int i1, int i2) const { return static_cast<std::size_t>(i2) * n1_ + i1; }
  Point2 node(std::size_t idx) const;
  Point2 node(int i1, int i2) const { return {domain_.x1_min + i1 * h1_, domain_.x2_min + i2 * h2_}; }
  std::size_t nearest(const Point2& x) const;

  const Eigen::VectorXd& weights() const { return weights_; }
  // exp(-beta V(x)) with the same normalisation as the node weights.
  double density(const Point2& x) const;

  const Potential& potential() const { return potential_; }
  const Thermo& thermo() const { return thermo_; }

 private:
  Domain domain_;
  int n1_, n2_;
  double h1_, h2_;
  Potential potential_;
  Thermo thermo_;
  double energy_shift_ = 0.0;  // min V over nodes, keeps exponents in range
  double log_norm_ = 0.0;
  Eigen::VectorXd weights_;
};

GridFunction sample(const Grid2D& grid, const std::function<double(const Point2&)>& fn);

double weighted_mean(const Grid2D& grid, const GridFunction& f);
double weighted_inner(const Grid2D& grid, const GridFunction& f, const GridFunction& g);
double weighted_variance(const Grid2D& grid, const GridFunction& f);

// n independent draws from the grid measure: a node chosen with probability
// w_i, then a uniform offset within its cell (clamped to the domain).
std::vector<Point2> sample_invariant(const Grid2D& grid, std::size_t n, std::uint64_t seed);

// Bilinear interpolation (clamped to the domain) and its gradient.
double interpolate(const Grid2D& grid, const GridFunction& f, const Point2& x);
Point2 interpolate_gradient(const Grid2D& grid, const GridFunction& f, const Point2& x);

}  // namespace slowcv::oracle

#include "slowcv/grid.hpp"

#include "slowcv/error.hpp"
#include "slowcv/rng.hpp"

#include <algorithm>
#include <cmath>

namespace slowcv::oracle {

namespace {
// Cap on beta (V - Vmin). Nodes above it carry relative weight e^{-300}
// instead of underflowing to zero, which keeps K + sigma W nonsingular.
constexpr double kMaxExponent = 300.0;
}  // namespace

Grid2D::Grid2D(const Domain& domain, int n1, int n2, const Potential& potential, const Thermo& thermo)
    : domain_(domain), n1_(n1), n2_(n2), potential_(potential), thermo_(thermo) {
  if (n1 < 3 || n2 < 3) throw Error(Errc::invalid_argument, "Grid2D needs at least 3 nodes per axis");
  if (!(domain.x1_max > domain.x1_min) || !(domain.x2_max > domain.x2_min)) {
    throw Error(Errc::invalid_argument, "Grid2D: empty domain");
  }
  h1_ = (domain.x1_max - domain.x1_min) / (n1 - 1);
  h2_ = (domain.x2_max - domain.x2_min) / (n2 - 1);

  Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) v[static_cast<Eigen::Index>(i)] = potential_.value(node(i));
  energy_shift_ = v.minCoeff();
  weights_ = (-(thermo_.beta * (v.array() - energy_shift_)).min(kMaxExponent)).exp();
  const double total = weights_.sum();
  log_norm_ = std::log(total);
  weights_ /= total;
}

Point2 Grid2D::node(std::size_t idx) const {
  const int i1 = static_cast<int>(idx % static_cast<std::size_t>(n1_));
  const int i2 = static_cast<int>(idx / static_cast<std::size_t>(n1_));
  return node(i1, i2);
}

std::size_t Grid2D::nearest(const Point2& x) const {
  const int i1 = std::clamp(static_cast<int>(std::lround((x[0] - domain_.x1_min) / h1_)), 0, n1_ - 1);
  const int i2 = std::clamp(static_cast<int>(std::lround((x[1] - domain_.x2_min) / h2_)), 0, n2_ - 1);
  return index(i1, i2);
}

double Grid2D::density(const Point2& x) const {
  return std::exp(-std::min(thermo_.beta * (potential_.value(x) - energy_shift_), kMaxExponent) - log_norm_);
}

std::vector<Point2> sample_invariant(const Grid2D& grid, std::size_t n, std::uint64_t seed) {
  std::vector<double> cdf(grid.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) cdf[i] = acc += grid.weights()[static_cast<Eigen::Index>(i)];
  const Domain& d = grid.domain();
  Rng rng(seed);
  std::vector<Point2> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), grid.size() - 1);
    Point2 x = grid.node(i);
    x[0] = std::clamp(x[0] + (rng.uniform() - 0.5) * grid.h1(), d.x1_min, d.x1_max);
    x[1] = std::clamp(x[1] + (rng.uniform() - 0.5) * grid.h2(), d.x2_min, d.x2_max);
    out.push_back(x);
  }
  return out;
}

GridFunction sample(const Grid2D& grid, const std::function<double(const Point2&)>& fn) {
  GridFunction f(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) f[static_cast<Eigen::Index>(i)] = fn(grid.node(i));
  return f;
}

namespace {
void check_size(const Grid2D& grid, const GridFunction& f) {
  if (static_cast<std::size_t>(f.size()) != grid.size()) {
    throw Error(Errc::dimension_mismatch, "grid function length does not match grid");
  }
}
}  // namespace

double weighted_mean(const Grid2D& grid, const GridFunction& f) {
  check_size(grid, f);
  return grid.weights().dot(f);
}

double weighted_inner(const Grid2D& grid, const GridFunction& f, const GridFunction& g) {
  check_size(grid, f);
  check_size(grid, g);
  return (grid.weights().array() * f.array() * g.array()).sum();
}

double weighted_variance(const Grid2D& grid, const GridFunction& f) {
  const double m = weighted_mean(grid, f);
  return (grid.weights().array() * (f.array() - m).square()).sum();
}

namespace {

struct Cell {
  int i1, i2;
  double t1, t2;  // local coordinates in [0, 1]
};

Cell locate(const Grid2D& grid, const Point2& x) {
  const Domain& d = grid.domain();
  const double s1 = (std::clamp(x[0], d.x1_min, d.x1_max) - d.x1_min) / grid.h1();
  const double s2 = (std::clamp(x[1], d.x2_min, d.x2_max) - d.x2_min) / grid.h2();
  const int i1 = std::min(static_cast<int>(s1), grid.n1() - 2);
  const int i2 = std::min(static_cast<int>(s2), grid.n2() - 2);
  return {i1, i2, s1 - i1, s2 - i2};
}

}  // namespace

double interpolate(const Grid2D& grid, const GridFunction& f, const Point2& x) {
  check_size(grid, f);
  const Cell c = locate(grid, x);
  const double f00 = f[static_cast<Eigen::Index>(grid.index(c.i1, c.i2))];
  const double f10 = f[static_cast<Eigen::Index>(grid.index(c.i1 + 1, c.i2))];
  const double f01 = f[static_cast<Eigen::Index>(grid.index(c.i1, c.i2 + 1))];
  const double f11 = f[static_cast<Eigen::Index>(grid.index(c.i1 + 1, c.i2 + 1))];
  return (1 - c.t1) * (1 - c.t2) * f00 + c.t1 * (1 - c.t2) * f10 + (1 - c.t1) * c.t2 * f01 + c.t1 * c.t2 * f11;
}

Point2 interpolate_gradient(const Grid2D& grid, const GridFunction& f, const Point2& x) {
  check_size(grid, f);
  const Cell c = locate(grid, x);
  const double f00 = f[static_cast<Eigen::Index>(grid.index(c.i1, c.i2))];
  const double f10 = f[static_cast<Eigen::Index>(grid.index(c.i1 + 1, c.i2))];
  const double f01 = f[static_cast<Eigen::Index>(grid.index(c.i1, c.i2 + 1))];
  const double f11 = f[static_cast<Eigen::Index>(grid.index(c.i1 + 1, c.i2 + 1))];
  const double d1 = ((1 - c.t2) * (f10 - f00) + c.t2 * (f11 - f01)) / grid.h1();
  const double d2 = ((1 - c.t1) * (f01 - f00) + c.t1 * (f11 - f10)) / grid.h2();
  return {d1, d2};
}

}  // namespace slowcv::oracle

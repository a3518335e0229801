#include "slowcv/error.hpp"
#include "slowcv/mep.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace slowcv;

namespace {

std::vector<double> spacings(const std::vector<Point2>& nodes) {
  std::vector<double> d;
  for (std::size_t i = 1; i < nodes.size(); ++i) d.push_back((nodes[i] - nodes[i - 1]).norm());
  return d;
}

double max_relative_spread(const std::vector<double>& d) {
  double mean = 0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(d.size());
  double worst = 0;
  for (double v : d) worst = std::max(worst, std::abs(v - mean) / mean);
  return worst;
}

}  // namespace

TEST(StringMethod, OrnsteinUhlenbeckPathIsStraight) {
  const Point2 a(-1, 0), b(1, 0);
  // (+-1, 0) are not minima of the OU potential; only the interior relaxes.
  StringConfig cfg;
  cfg.require_minima = false;
  const auto path = string_method(Potential::quadratic_ou(), a, b, cfg);
  EXPECT_TRUE(path.converged);
  EXPECT_EQ(path.nodes.front(), a);
  EXPECT_EQ(path.nodes.back(), b);
  double dev = 0;
  for (const auto& x : path.nodes) dev = std::max(dev, std::abs(x[1]));
  EXPECT_LE(dev, 1e-6);
}

TEST(StringMethod, Example1EndpointsPinnedAndEqualArclength) {
  const Point2 a(-1, 0), b(1, 0);
  const auto path = string_method(Potential::example1(), a, b);
  EXPECT_TRUE(path.converged);
  ASSERT_EQ(path.nodes.size(), 50u);
  EXPECT_EQ(path.nodes.front(), a);
  EXPECT_EQ(path.nodes.back(), b);
  // Chords of the converged string are equal up to its curvature.
  EXPECT_LE(max_relative_spread(spacings(path.nodes)), 1e-3);
  // Symmetric potential and endpoints: the path is mirror symmetric in x1.
  for (std::size_t i = 0; i < 25; ++i) {
    EXPECT_NEAR(path.nodes[i][0], -path.nodes[49 - i][0], 1e-6);
    EXPECT_NEAR(path.nodes[i][1], path.nodes[49 - i][1], 1e-6);
  }
  // The path detours upward through the channel rather than the straight line.
  EXPECT_GT(path.nodes[25][1], 0.3);
}

TEST(StringMethod, MaxEnergyNonIncreasingAfterTransient) {
  const auto path = string_method(Potential::example1(), {-1, 0}, {1, 0});
  ASSERT_GT(path.max_energy.size(), 20u);
  for (std::size_t i = 11; i < path.max_energy.size(); ++i) {
    EXPECT_LE(path.max_energy[i], path.max_energy[i - 1] + 1e-12) << i;
  }
}

TEST(StringMethod, NotConvergedReturnsLastString) {
  StringConfig cfg;
  cfg.max_iters = 5;
  const auto path = string_method(Potential::example1(), {-1, 0}, {1, 0}, cfg);
  EXPECT_FALSE(path.converged);
  EXPECT_EQ(path.iterations, 5);
  EXPECT_EQ(path.nodes.size(), 50u);
}

TEST(StringMethod, Validation) {
  StringConfig cfg;
  cfg.nodes = 5;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_THROW((void)string_method(Potential::quadratic_ou(), {-1, 0}, {1, 0}), Error);
}

TEST(Reparameterize, EqualArclengthAlongSourcePolyline) {
  const std::vector<Point2> poly{{0, 0}, {0.1, 0}, {0.2, 0}, {3, 0}, {3, 1}, {3, 4}};
  const auto r = reparameterize(poly);
  ASSERT_EQ(r.size(), poly.size());
  EXPECT_EQ(r.front(), poly.front());
  EXPECT_EQ(r.back(), poly.back());
  // Length 7 over 5 segments: arclength 1.4 k along the L-shaped polyline.
  const std::vector<Point2> expect{{0, 0}, {1.4, 0}, {2.8, 0}, {3, 1.2}, {3, 2.6}, {3, 4}};
  for (std::size_t k = 0; k < r.size(); ++k) EXPECT_LE((r[k] - expect[k]).norm(), 1e-12) << k;
}

TEST(Reparameterize, StraightLineIsFixedPoint) {
  std::vector<Point2> line;
  for (int k = 0; k < 20; ++k) line.emplace_back(0.1 * k * k, 0.05 * k * k);
  const auto r = reparameterize(line);
  EXPECT_LE(max_relative_spread(spacings(r)), 1e-12);
  const auto rr = reparameterize(r);
  for (std::size_t k = 0; k < r.size(); ++k) EXPECT_LE((rr[k] - r[k]).norm(), 1e-12);
}

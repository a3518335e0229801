#include "slowcv/error.hpp"
#include "slowcv/rng.hpp"
#include "slowcv/sampler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

using namespace slowcv;

TEST(Rng, Reproducible) {
  Rng a(7), b(7), c(8);
  for (int i = 0; i < 10; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(Rng(7).bits(), c.bits());
}

TEST(Rng, GaussianMoments) {
  Rng rng(11);
  double s1 = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n / 2; ++i) {
    const auto [g1, g2] = rng.gaussian_pair();
    s1 += g1 + g2;
    s2 += g1 * g1 + g2 * g2;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Rng, PermutationAndBelow) {
  Rng rng(3);
  auto p = rng.permutation(1000);
  std::vector<std::size_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> iota(1000);
  std::iota(iota.begin(), iota.end(), 0);
  EXPECT_EQ(sorted, iota);
  EXPECT_NE(p, iota);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
}

TEST(Sampler, FirstStepMatchesEulerMaruyama) {
  const auto pot = Potential::example1();
  const Thermo th(4.0);
  const Point2 x0(0.3, -0.2);
  const auto traj = simulate(pot, th, x0, 0.005, 1, 99);
  ASSERT_EQ(traj.states.size(), 2u);
  Rng rng(99);
  const auto [g1, g2] = rng.gaussian_pair();
  const Point2 expect = x0 - pot.gradient(x0) * 0.005 + std::sqrt(2 * 0.005 / 4.0) * Point2(g1, g2);
  EXPECT_EQ(traj.states[0], x0);
  EXPECT_EQ(traj.states[1], expect);
}

TEST(Sampler, DeterministicGivenSeed) {
  const auto pot = Potential::example2();
  const auto a = simulate(pot, Thermo(1.5), {2.0, 0.0}, 0.005, 2000, 5);
  const auto b = simulate(pot, Thermo(1.5), {2.0, 0.0}, 0.005, 2000, 5);
  const auto c = simulate(pot, Thermo(1.5), {2.0, 0.0}, 0.005, 2000, 6);
  EXPECT_EQ(a.states, b.states);
  EXPECT_NE(a.states, c.states);
}

TEST(Sampler, OrnsteinUhlenbeckStationaryVariance) {
  // dX = -X dt + sqrt(2/beta) dW: stationary variance 1/beta per coordinate
  // (Euler-Maruyama: 1 / (beta (1 - dt/2))).
  const double beta = 2.0, dt = 0.01;
  const auto traj = simulate(Potential::quadratic_ou(), Thermo(beta), {0.0, 0.0}, dt, 400000, 17);
  double s = 0;
  for (std::size_t i = 1000; i < traj.states.size(); ++i) s += traj.states[i].squaredNorm();
  s /= 2.0 * static_cast<double>(traj.states.size() - 1000);
  EXPECT_NEAR(s, 1.0 / (beta * (1 - dt / 2)), 0.02);
}

TEST(Sampler, DivergenceDetected) {
  try {
    (void)simulate(Potential::example1(), Thermo(4.0), {1.0, 0.0}, 0.5, 1000, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::diverged);
  }
}

TEST(Sampler, SubsampleCounts) {
  const auto traj = simulate(Potential::quadratic_ou(), Thermo(1.0), {0.0, 0.0}, 0.01, 10, 1);
  const auto a = subsample(traj, 2);
  ASSERT_EQ(a.size(), 6u);
  EXPECT_EQ(a.points[1], traj.states[2]);
  const auto b = subsample(traj, 2, SubsampleOrigin::skip_initial);
  ASSERT_EQ(b.size(), 5u);
  EXPECT_EQ(b.points[0], traj.states[2]);
  EXPECT_EQ(b.points[4], traj.states[10]);
  EXPECT_DOUBLE_EQ(b.effective_dt(), 0.02);
}

TEST(Sampler, LaggedPairs) {
  Dataset d;
  d.dt = 0.005;
  d.stride = 2;
  for (int i = 0; i < 10; ++i) d.points.emplace_back(i, -i);
  const auto p = lagged_pairs(d, 3);
  ASSERT_EQ(p.size(), 7u);
  EXPECT_EQ(p.pairs[0].x, Point2(0, 0));
  EXPECT_EQ(p.pairs[0].y, Point2(3, -3));
  EXPECT_DOUBLE_EQ(p.tau, 0.03);
  const auto z = lagged_pairs(d, 0);
  EXPECT_EQ(z.pairs[4].x, z.pairs[4].y);
  try {
    (void)lagged_pairs(d, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::lag_too_large);
  }
}

TEST(Sampler, LagSteps) {
  EXPECT_EQ(lag_steps(1.0, 0.01), 100);
  EXPECT_EQ(lag_steps(0.5, 0.01), 50);
  EXPECT_THROW((void)lag_steps(0.015, 0.01), Error);
}

TEST(Sampler, DatasetRoundTrip) {
  const auto traj = simulate(Potential::example1(), Thermo(4.0), {1.0, 0.0}, 0.005, 200, 3);
  const auto d = subsample(traj, 2, SubsampleOrigin::skip_initial);
  const auto path = std::filesystem::temp_directory_path() / "slowcv_dataset_roundtrip.csv";
  write_dataset(path, d, {0.005, 2, 3, "example1", 0.5, 4.0});
  DatasetMeta meta;
  const auto back = read_dataset(path, &meta);
  EXPECT_EQ(back.points, d.points);
  EXPECT_EQ(back.stride, 2);
  EXPECT_EQ(meta.seed, 3u);
  EXPECT_EQ(meta.potential, "example1");
}

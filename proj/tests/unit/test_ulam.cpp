#include "slowcv/error.hpp"
#include "slowcv/rng.hpp"
#include "slowcv/sampler.hpp"
#include "slowcv/ulam.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace slowcv;
using namespace slowcv::oracle;

namespace {

UlamModel two_state(double p) {
  Eigen::MatrixXd P(2, 2);
  P << 1 - p, p, p, 1 - p;
  return ulam_from_matrix(P, Eigen::Vector2d(0.5, 0.5));
}

UlamModel example1_model(int n1, int n2) {
  const auto pot = Potential::example1();
  const auto traj = simulate(pot, Thermo(4.0), {1.0, 0.0}, 0.005, 20000, 7);
  const auto pairs = lagged_pairs(subsample(traj, 2), 20);
  return ulam_transfer(pairs, BinSpec{pot.default_domain(), n1, n2});
}

}  // namespace

TEST(BinSpec, LabelsAndOverflow) {
  const BinSpec b{Domain{0, 2, 0, 1}, 4, 2};
  EXPECT_EQ(b.label({0.1, 0.1}), 0);
  EXPECT_EQ(b.label({1.9, 0.9}), 7);
  EXPECT_EQ(b.label({2.0, 1.0}), 7);
  EXPECT_EQ(b.label({-0.1, 0.5}), b.overflow());
  EXPECT_EQ(b.label({0.5, 3.0}), 8);
  EXPECT_NEAR(b.center(5)[0], 0.75, 1e-15);
  EXPECT_NEAR(b.center(5)[1], 0.75, 1e-15);
  EXPECT_TRUE(std::isnan(b.center(b.overflow())[0]));
  EXPECT_THROW((BinSpec{Domain{0, 1, 0, 1}, 0, 3}.validate()), Error);
}

TEST(Ulam, AlternatingPairsHaveZeroDiagonal) {
  const std::vector<std::pair<int, int>> t{{0, 1}, {1, 0}, {0, 1}};
  for (bool sym : {false, true}) {
    const auto m = ulam_from_labels(t, 2, sym);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m.P(0, 0), 0.0);
    EXPECT_EQ(m.P(1, 1), 0.0);
    EXPECT_EQ(m.P(0, 1), 1.0);
  }
  const auto raw = ulam_from_labels(t, 2, false);
  EXPECT_NEAR(raw.pi[0], 2.0 / 3, 1e-15);
  const auto sym = ulam_from_labels(t, 2, true);
  EXPECT_NEAR(sym.pi[0], 0.5, 1e-15);
}

TEST(Ulam, CountsOverVisitedBins) {
  // 0->0, 0->2, 2->0, 2->2 twice; bin 1 is never visited.
  const std::vector<std::pair<int, int>> t{{0, 0}, {0, 2}, {2, 0}, {2, 2}, {2, 2}};
  const auto m = ulam_from_labels(t, 3, false);
  ASSERT_EQ(m.bins, (std::vector<int>{0, 2}));
  EXPECT_EQ(m.row_of(1), -1);
  EXPECT_NEAR(m.P(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(m.P(1, 0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(m.pi[1], 0.6, 1e-15);
}

TEST(Ulam, DropsBinsWithoutOutgoingPairs) {
  // Bin 2 is only ever a target (end of the data); its incoming pair goes too.
  const std::vector<std::pair<int, int>> t{{0, 1}, {1, 0}, {0, 1}, {1, 2}};
  const auto m = ulam_from_labels(t, 3, false);
  EXPECT_EQ(m.bins, (std::vector<int>{0, 1}));
  EXPECT_EQ(m.dropped_bins, (std::vector<int>{2}));
  EXPECT_EQ(m.dropped_pairs, 1);
  EXPECT_NEAR(m.P.rowwise().sum().maxCoeff(), 1.0, 1e-15);
}

TEST(Ulam, SymmetrizedModelIsReversible) {
  const auto m = example1_model(10, 10);
  ASSERT_TRUE(m.symmetrized);
  EXPECT_NEAR(m.pi.sum(), 1.0, 1e-12);
  const Eigen::MatrixXd flux = m.pi.asDiagonal() * m.P;
  EXPECT_LE((flux - flux.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((m.P.rowwise().sum().array() - 1).abs().maxCoeff(), 1e-12);
}

TEST(Ulam, TopEigenpairIsOneAndConstant) {
  const auto m = example1_model(10, 10);
  const auto e = transfer_eigs(m, 3);
  EXPECT_NEAR(e.values[0], 1.0, 1e-12);
  EXPECT_LE((e.vectors.col(0).array() - 1.0).abs().maxCoeff(), 1e-8);
  EXPECT_LT(e.values[1], 1.0);
  EXPECT_GE(e.values[1], e.values[2]);
  const Eigen::MatrixXd gram = e.vectors.transpose() * m.pi.asDiagonal() * e.vectors;
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GE(e.vectors(0, 1), 0.0);
}

TEST(Ulam, TransferEigsNeedsSymmetrizedModel) {
  const std::vector<std::pair<int, int>> t{{0, 1}, {1, 0}, {0, 0}};
  EXPECT_THROW((void)transfer_eigs(ulam_from_labels(t, 2, false), 1), Error);
}

TEST(TransferEnergyIdentity, TwoStateHandValue) {
  // Dyadic p keeps every intermediate exact.
  for (double p : {0.125, 0.25, 0.5}) {
    const auto c = lemma1_check(two_state(p), Eigen::Vector2d(1, -1));
    EXPECT_EQ(c.lhs, 2 * p);
    EXPECT_EQ(c.rhs, 2 * p);
    EXPECT_EQ(c.error, 0.0);
  }
  const auto c = lemma1_check(two_state(0.1), Eigen::Vector2d(1, -1));
  EXPECT_NEAR(c.lhs, 0.2, 1e-15);
  EXPECT_NEAR(c.rhs, 0.2, 1e-15);
}

TEST(TransferEnergyIdentity, ConstantIsZero) {
  const auto c = lemma1_check(two_state(0.3), Eigen::Vector2d(4, 4));
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_EQ(c.rhs, 0.0);
  EXPECT_EQ(c.error, 0.0);
}

TEST(TransferEnergyIdentity, RandomFunctionsOnExample1Model) {
  const auto m = example1_model(5, 4);
  ASSERT_GE(m.size(), 5u);
  Rng rng(11);
  for (int r = 0; r < 50; ++r) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(m.size()));
    for (auto& v : f) v = rng.uniform(-1.0, 1.0);
    EXPECT_LE(lemma1_check(m, f).error, 1e-10);
  }
}

TEST(Ulam, FromMatrixValidates) {
  Eigen::MatrixXd P(2, 2);
  P << 0.5, 0.4, 0.5, 0.5;
  EXPECT_THROW((void)ulam_from_matrix(P, Eigen::Vector2d(0.5, 0.5)), Error);
}

#include "slowcv/error.hpp"
#include "slowcv/net.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

using namespace slowcv;

namespace {

// Plain loop-based forward pass used as the reference.
Eigen::VectorXd reference_forward(const MlpModel& m, Eigen::VectorXd h) {
  const auto& sizes = m.spec().layer_sizes;
  const auto& p = m.params();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    Eigen::VectorXd z(out);
    for (int r = 0; r < out; ++r) {
      double s = 0.0;
      for (int c = 0; c < in; ++c) s += p[off + static_cast<std::size_t>(r * in + c)] * h[c];
      z[r] = s + p[off + static_cast<std::size_t>(in * out + r)];
    }
    off += static_cast<std::size_t>((in + 1) * out);
    h = (l + 2 < sizes.size()) ? Eigen::VectorXd(z.array().tanh()) : z;
  }
  return h;
}

}  // namespace

TEST(Net, ParamCounts) {
  EXPECT_EQ((MlpSpec{{2, 30, 30, 30, 30, 1}}.param_count()), 2911u);
  EXPECT_EQ((MlpSpec{{1, 30, 30, 30, 2}}.param_count()), 1982u);
  EXPECT_EQ((MlpSpec{{2, 20, 20, 20, 1}}.param_count()), 921u);
  EXPECT_THROW(MlpSpec{{2}}.validate(), Error);
  EXPECT_THROW(MlpSpec({{2, 0, 1}}).validate(), Error);
  EXPECT_THROW(MlpModel(MlpSpec{{2, 1}}, std::vector<double>(2)), Error);
}

TEST(Net, InitIsDeterministicAndBounded) {
  const MlpSpec spec{{2, 30, 30, 1}};
  const auto a = MlpModel::init(spec, 2046);
  const auto b = MlpModel::init(spec, 2046);
  EXPECT_EQ(a.params(), b.params());
  for (int l = 0; l < spec.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(spec.layer_sizes[static_cast<std::size_t>(l)]);
    EXPECT_LE(a.weight(l).cwiseAbs().maxCoeff(), bound);
    EXPECT_GT(a.weight(l).cwiseAbs().maxCoeff(), 0.5 * bound);
    EXPECT_EQ(a.bias(l).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Net, ForwardMatchesReference) {
  const auto m = MlpModel::init(MlpSpec{{2, 5, 4, 3}}, 1);
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector2d x(rng.uniform(-2, 2), rng.uniform(-2, 2));
    EXPECT_LE((m.forward(x) - reference_forward(m, x)).norm(), 1e-14);
  }
}

TEST(Net, HandComputedTinyNetwork) {
  // h = tanh(1 * x + 0.5), y = 2 h - 1
  const MlpModel m(MlpSpec{{1, 1, 1}}, {1.0, 0.5, 2.0, -1.0});
  Eigen::VectorXd x(1);
  x << 0.25;
  EXPECT_DOUBLE_EQ(m.forward(x)[0], 2.0 * std::tanh(0.75) - 1.0);
  EXPECT_NEAR(m.input_gradient(x)(0, 0), 2.0 * (1.0 - std::pow(std::tanh(0.75), 2)), 1e-15);
}

TEST(Net, BatchMatchesSingle) {
  const auto m = MlpModel::init(MlpSpec{{2, 7, 7, 2}}, 3);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 9);
  const Eigen::MatrixXd y = m.forward_batch(x);
  for (int c = 0; c < 9; ++c) EXPECT_LE((y.col(c) - m.forward(x.col(c))).norm(), 1e-14);
}

TEST(Net, InputGradientMatchesFiniteDifferences) {
  const auto m = MlpModel::init(MlpSpec{{2, 30, 30, 30, 30, 1}}, 7);
  Rng rng(8);
  const double h = 1e-6;
  for (int t = 0; t < 5; ++t) {
    const Eigen::Vector2d x(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Eigen::MatrixXd g = m.input_gradient(x);
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2d a = x, b = x;
      a[j] += h;
      b[j] -= h;
      EXPECT_NEAR(g(0, j), (m.forward(a)[0] - m.forward(b)[0]) / (2 * h), 1e-7);
    }
    const Eigen::MatrixXd gb = input_gradients(m, x);
    EXPECT_LE((gb - g.transpose()).norm(), 1e-14);
  }
}

TEST(Net, TangentIsDirectionalDerivative) {
  const auto m = MlpModel::init(MlpSpec{{2, 6, 6, 2}}, 9);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 4);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Random(2, 4);
  const Tape tape = record(m, x, &v);
  const double h = 1e-6;
  const Eigen::MatrixXd fd = (m.forward_batch(x + h * v) - m.forward_batch(x - h * v)) / (2 * h);
  EXPECT_LE((tape.output_tangent() - fd).norm(), 1e-8);
}

TEST(Net, ParameterGradientMatchesFiniteDifferences) {
  // Objective sum(c * f) + sum(d * df[v]) exercises both adjoint paths.
  auto m = MlpModel::init(MlpSpec{{2, 5, 5, 1}}, 11);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 6);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Random(2, 6);
  const Eigen::MatrixXd c = Eigen::MatrixXd::Random(1, 6);
  const Eigen::MatrixXd d = Eigen::MatrixXd::Random(1, 6);
  auto objective = [&](const MlpModel& mm) {
    const Tape t = record(mm, x, &v);
    return (c.array() * t.output().array()).sum() + (d.array() * t.output_tangent().array()).sum();
  };
  std::vector<double> grad(m.params().size(), 0.0);
  const Tape tape = record(m, x, &v);
  backpropagate(m, tape, c, &d, grad);
  const double h = 1e-6;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double keep = m.params()[i];
    m.params()[i] = keep + h;
    const double up = objective(m);
    m.params()[i] = keep - h;
    const double down = objective(m);
    m.params()[i] = keep;
    EXPECT_NEAR(grad[i], (up - down) / (2 * h), 1e-7 * (1 + std::abs(grad[i]))) << "param " << i;
  }
}

TEST(Net, AdamFirstStep) {
  std::vector<double> p{1.0, -2.0};
  const std::vector<double> g{0.5, -4.0};
  AdamState s(2, AdamConfig{.lr = 0.1});
  adam_step(p, g, s);
  // Bias-corrected first step moves each coordinate by lr * sign(g).
  EXPECT_NEAR(p[0], 0.9, 1e-7);
  EXPECT_NEAR(p[1], -1.9, 1e-7);
  EXPECT_EQ(s.step, 1);
}

TEST(Net, CheckpointRoundTripIsBitExact) {
  const auto m = MlpModel::init(MlpSpec{{2, 30, 30, 30, 30, 1}}, 2046);
  const auto path = std::filesystem::temp_directory_path() / "slowcv_net_roundtrip.json";
  save_model(path, m);
  const auto back = load_model(path);
  EXPECT_EQ(back.params(), m.params());
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 50);
  EXPECT_EQ(back.forward_batch(x), m.forward_batch(x));
}

TEST(Net, RejectsMalformedCheckpoint) {
  nlohmann::json j = model_to_json(MlpModel::zeros(MlpSpec{{2, 1}}));
  j["activation"] = "relu";
  EXPECT_THROW((void)model_from_json(j), Error);
}

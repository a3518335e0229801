#pragma once

#include "slowcv/rng.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace slowcv {

// Layer sizes from input to output; tanh on hidden layers, identity output.
struct MlpSpec {
  std::vector<int> layer_sizes;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }  // affine maps
  std::size_t param_count() const;
  void validate() const;
};

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Feed-forward tanh network with a flat parameter vector. Layout, per affine
// layer l = 0..L-1: the (out x in) weight matrix in row-major order, then the
// out biases.
class MlpModel {
 public:
  MlpModel(MlpSpec spec, std::vector<double> params);

  static MlpModel zeros(const MlpSpec& spec);
  // Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) drawn in parameter order;
  // biases are zero and consume no draws.
  static MlpModel init(const MlpSpec& spec, Rng& rng);
  static MlpModel init(const MlpSpec& spec, std::uint64_t seed);

  const MlpSpec& spec() const { return spec_; }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& params() { return params_; }

  std::size_t weight_offset(int layer) const { return offsets_[static_cast<std::size_t>(layer)]; }
  std::size_t bias_offset(int layer) const;
  Eigen::Map<const RowMajorMatrix> weight(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  // Columns of `inputs` are samples.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;
  // d output / d input, (out x in), via reverse passes.
  Eigen::MatrixXd input_gradient(const Eigen::VectorXd& x) const;

 private:
  MlpSpec spec_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
};

// Stored forward pass over a batch. With an input tangent it also carries
// the forward-mode directional derivatives of every layer.
struct Tape {
  std::vector<Eigen::MatrixXd> activations;  // layer 0 = inputs, last = outputs
  std::vector<Eigen::MatrixXd> tangents;     // empty, or same shapes as activations

  const Eigen::MatrixXd& output() const { return activations.back(); }
  const Eigen::MatrixXd& output_tangent() const { return tangents.back(); }
  bool has_tangent() const { return !tangents.empty(); }
};

Tape record(const MlpModel& model, const Eigen::MatrixXd& inputs,
            const Eigen::MatrixXd* input_tangents = nullptr);

// Reverse pass for the scalar  sum(output_adjoint .* output)
//                            + sum(tangent_adjoint .* output_tangent).
// The second term differentiates through the tangent computation, which is
// what objectives built on input gradients need. Parameter gradients are
// accumulated (+=) into `param_grad` when it is non-empty. Returns the adjoint
// of the inputs (tangent contributions excluded).
Eigen::MatrixXd backpropagate(const MlpModel& model, const Tape& tape, const Eigen::MatrixXd& output_adjoint,
                              const Eigen::MatrixXd* tangent_adjoint, std::span<double> param_grad);

// Input gradients of a scalar-output model, one column per sample (in x B).
Eigen::MatrixXd input_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;

  AdamState(std::size_t n, AdamConfig cfg) : config(cfg), m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update of `params` in place.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state);

nlohmann::json model_to_json(const MlpModel& model);
MlpModel model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace slowcv

#include "slowcv/net.hpp"

#include "slowcv/csv.hpp"
#include "slowcv/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace slowcv {

std::size_t MlpSpec::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += static_cast<std::size_t>(layer_sizes[l] + 1) * static_cast<std::size_t>(layer_sizes[l + 1]);
  }
  return n;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw Error(Errc::invalid_argument, "MLP needs at least an input and an output layer");
  for (int s : layer_sizes) {
    if (s < 1) throw Error(Errc::invalid_argument, "MLP layer sizes must be >= 1");
  }
}

MlpModel::MlpModel(MlpSpec spec, std::vector<double> params) : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  if (params_.size() != spec_.param_count()) {
    throw Error(Errc::dimension_mismatch,
                fmt::format("MLP expects {} parameters, got {}", spec_.param_count(), params_.size()));
  }
  std::size_t off = 0;
  for (int l = 0; l < spec_.num_layers(); ++l) {
    offsets_.push_back(off);
    off += static_cast<std::size_t>(spec_.layer_sizes[l] + 1) * static_cast<std::size_t>(spec_.layer_sizes[l + 1]);
  }
}

MlpModel MlpModel::zeros(const MlpSpec& spec) {
  spec.validate();
  return MlpModel(spec, std::vector<double>(spec.param_count(), 0.0));
}

MlpModel MlpModel::init(const MlpSpec& spec, Rng& rng) {
  MlpModel m = zeros(spec);
  for (int l = 0; l < spec.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.layer_sizes[l]));
    const std::size_t n = static_cast<std::size_t>(spec.layer_sizes[l]) * static_cast<std::size_t>(spec.layer_sizes[l + 1]);
    for (std::size_t i = 0; i < n; ++i) m.params_[m.offsets_[l] + i] = rng.uniform(-bound, bound);
  }
  return m;
}

MlpModel MlpModel::init(const MlpSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return init(spec, rng);
}

std::size_t MlpModel::bias_offset(int layer) const {
  return offsets_[layer] + static_cast<std::size_t>(spec_.layer_sizes[layer]) * static_cast<std::size_t>(spec_.layer_sizes[layer + 1]);
}

Eigen::Map<const RowMajorMatrix> MlpModel::weight(int layer) const {
  return {params_.data() + offsets_[layer], spec_.layer_sizes[layer + 1], spec_.layer_sizes[layer]};
}

Eigen::Map<const Eigen::VectorXd> MlpModel::bias(int layer) const {
  return {params_.data() + bias_offset(layer), spec_.layer_sizes[layer + 1]};
}

Eigen::VectorXd MlpModel::forward(const Eigen::VectorXd& x) const {
  return forward_batch(x);
}

Eigen::MatrixXd MlpModel::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != spec_.input_dim()) {
    throw Error(Errc::dimension_mismatch,
                fmt::format("MLP input has {} rows, expected {}", inputs.rows(), spec_.input_dim()));
  }
  Eigen::MatrixXd h = inputs;
  const int last = spec_.num_layers() - 1;
  for (int l = 0; l <= last; ++l) {
    Eigen::MatrixXd z = weight(l) * h;
    z.colwise() += bias(l);
    h = l < last ? Eigen::MatrixXd(z.array().tanh()) : std::move(z);
  }
  return h;
}

Eigen::MatrixXd MlpModel::input_gradient(const Eigen::VectorXd& x) const {
  const Tape tape = record(*this, x);
  Eigen::MatrixXd jac(spec_.output_dim(), spec_.input_dim());
  for (int o = 0; o < spec_.output_dim(); ++o) {
    Eigen::MatrixXd seed = Eigen::MatrixXd::Zero(spec_.output_dim(), 1);
    seed(o, 0) = 1.0;
    jac.row(o) = backpropagate(*this, tape, seed, nullptr, {}).col(0).transpose();
  }
  return jac;
}

Tape record(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd* input_tangents) {
  const MlpSpec& spec = model.spec();
  if (inputs.rows() != spec.input_dim()) {
    throw Error(Errc::dimension_mismatch,
                fmt::format("MLP input has {} rows, expected {}", inputs.rows(), spec.input_dim()));
  }
  Tape tape;
  const int layers = spec.num_layers();
  tape.activations.reserve(static_cast<std::size_t>(layers) + 1);
  tape.activations.push_back(inputs);
  if (input_tangents) {
    if (input_tangents->rows() != inputs.rows() || input_tangents->cols() != inputs.cols()) {
      throw Error(Errc::dimension_mismatch, "MLP input tangent shape differs from inputs");
    }
    tape.tangents.reserve(static_cast<std::size_t>(layers) + 1);
    tape.tangents.push_back(*input_tangents);
  }
  for (int l = 0; l < layers; ++l) {
    const auto w = model.weight(l);
    Eigen::MatrixXd z = w * tape.activations.back();
    z.colwise() += model.bias(l);
    const bool hidden = l + 1 < layers;
    if (hidden) z = z.array().tanh();
    if (input_tangents) {
      Eigen::MatrixXd zdot = w * tape.tangents.back();
      if (hidden) zdot.array() *= 1.0 - z.array().square();
      tape.tangents.push_back(std::move(zdot));
    }
    tape.activations.push_back(std::move(z));
  }
  return tape;
}

Eigen::MatrixXd backpropagate(const MlpModel& model, const Tape& tape, const Eigen::MatrixXd& output_adjoint,
                              const Eigen::MatrixXd* tangent_adjoint, std::span<double> param_grad) {
  const bool with_tangent = tangent_adjoint != nullptr;
  if (with_tangent && !tape.has_tangent()) {
    throw Error(Errc::invalid_argument, "backpropagate: tangent adjoint given but tape has no tangent");
  }
  const bool want_grad = !param_grad.empty();
  if (want_grad && param_grad.size() != model.params().size()) {
    throw Error(Errc::dimension_mismatch, "backpropagate: gradient buffer has wrong length");
  }

  Eigen::MatrixXd zbar = output_adjoint;
  Eigen::MatrixXd zdbar;
  if (with_tangent) zdbar = *tangent_adjoint;

  for (int l = model.spec().num_layers() - 1; l >= 0; --l) {
    const auto w = model.weight(l);
    const Eigen::MatrixXd& h_in = tape.activations[static_cast<std::size_t>(l)];
    if (want_grad) {
      const int rows = model.spec().layer_sizes[l + 1];
      const int cols = model.spec().layer_sizes[l];
      Eigen::Map<RowMajorMatrix> gw(param_grad.data() + model.weight_offset(l), rows, cols);
      Eigen::Map<Eigen::VectorXd> gb(param_grad.data() + model.bias_offset(l), rows);
      gw.noalias() += zbar * h_in.transpose();
      if (with_tangent) gw.noalias() += zdbar * tape.tangents[static_cast<std::size_t>(l)].transpose();
      gb += zbar.rowwise().sum();
    }
    Eigen::MatrixXd hbar = w.transpose() * zbar;
    if (l == 0) return hbar;

    // h = tanh(z), hdot = (1 - h^2) zdot:
    //   zbar  = (1 - h^2) hbar - 2 h hdot hdbar
    //   zdbar = (1 - h^2) hdbar
    const Eigen::ArrayXXd s = 1.0 - h_in.array().square();
    if (with_tangent) {
      Eigen::MatrixXd hdbar = w.transpose() * zdbar;
      const auto& hdot = tape.tangents[static_cast<std::size_t>(l)];
      zbar = s * hbar.array() - 2.0 * h_in.array() * hdot.array() * hdbar.array();
      zdbar = s * hdbar.array();
    } else {
      zbar = s * hbar.array();
    }
  }
  return zbar;  // unreachable for valid specs
}

Eigen::MatrixXd input_gradients(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  if (model.spec().output_dim() != 1) {
    throw Error(Errc::dimension_mismatch, "input_gradients: model must have a scalar output");
  }
  const Tape tape = record(model, inputs);
  return backpropagate(model, tape, Eigen::MatrixXd::Ones(1, inputs.cols()), nullptr, {});
}

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state) {
  if (params.size() != grad.size() || params.size() != state.m.size()) {
    throw Error(Errc::dimension_mismatch, "adam_step: parameter, gradient and state lengths differ");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grad[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

nlohmann::json model_to_json(const MlpModel& model) {
  return {{"layer_sizes", model.spec().layer_sizes}, {"activation", "tanh"}, {"params", model.params()}};
}

MlpModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("activation").get<std::string>() != "tanh") {
      throw Error(Errc::io, "checkpoint: unsupported activation '" + j.at("activation").get<std::string>() + "'");
    }
    MlpSpec spec{j.at("layer_sizes").get<std::vector<int>>()};
    return MlpModel(std::move(spec), j.at("params").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, std::string("checkpoint: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
  write_json(path, model_to_json(model));
}

MlpModel load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

}  // namespace slowcv

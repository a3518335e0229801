#pragma once

#include "slowcv/net.hpp"
#include "slowcv/sampler.hpp"
#include "slowcv/types.hpp"

#include <span>
#include <vector>

namespace slowcv {

// Mean and 1/N-normalised covariance of k features over N samples.
struct EmpiricalStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  Eigen::VectorXd variance() const { return covariance.diagonal(); }
};

// `values` is k x N (one column per sample). Throws Errc::too_few_samples
// for N < 2.
EmpiricalStats empirical_stats(const Eigen::MatrixXd& values);

struct EigenLossConfig {
  int k = 1;
  std::vector<double> omegas{1.0};  // non-increasing, positive
  double alpha = 10.0;              // orthonormality penalty
  double beta = 1.0;                // generator loss only
  double tau = 1.0;                 // transfer loss only
  double var_guard = 1e-6;          // added to every variance denominator

  void validate() const;
};

struct LossTerms {
  double total = 0.0;
  double spectral = 0.0;  // weighted energy / variance part
  double penalty = 0.0;   // alpha * sum_{a <= b} (Cov_ab - delta_ab)^2
  Eigen::VectorXd variance;
};

// One parameter-gradient buffer per model, in argument order.
using ModelGrads = std::vector<std::vector<double>>;

//   (1/beta) sum_i w_i E|grad f_i|^2 / (Var f_i + eps_v) + penalty
LossTerms eigen_generator_loss(std::span<const MlpModel> models, std::span<const Point2> batch,
                               const EigenLossConfig& cfg, ModelGrads* grads = nullptr);

//   (1/(2 tau)) sum_i w_i E|f_i(y) - f_i(x)|^2 / (Var f_i + eps_v) + penalty
// with Var/Cov taken over `stats_batch`.
LossTerms eigen_transfer_loss(std::span<const MlpModel> models, std::span<const StatePair> pairs,
                              std::span<const Point2> stats_batch, const EigenLossConfig& cfg,
                              ModelGrads* grads = nullptr);

// Same, with Var/Cov over the x-components of the pairs.
LossTerms eigen_transfer_loss(std::span<const MlpModel> models, std::span<const StatePair> pairs,
                              const EigenLossConfig& cfg, ModelGrads* grads = nullptr);

// (1/N) sum |dec(enc(x)) - x|^2. grads, if given, receives {encoder, decoder}.
double ae_loss(const MlpModel& enc, const MlpModel& dec, std::span<const Point2> batch,
               ModelGrads* grads = nullptr);

// (1/P) sum |dec(enc(x)) - y|^2 over lagged pairs.
double tlae_loss(const MlpModel& enc, const MlpModel& dec, std::span<const StatePair> pairs,
                 ModelGrads* grads = nullptr);

}  // namespace slowcv

#pragma once

#include "slowcv/losses.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace slowcv {

struct TrainOptions {
  double lr = 0.005;
  long batch_size = 20000;
  int epochs = 500;
  std::uint64_t seed = 2046;
};

// Sample-weighted means of the batch values seen during one epoch.
struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double spectral = 0.0;
  double penalty = 0.0;
  std::vector<double> variance;
};

// Loss and gradients of every model on the items selected by `batch`.
using BatchObjective = std::function<LossTerms(std::span<const std::size_t> batch, ModelGrads& grads)>;
using EpochCallback = std::function<void(const EpochRecord&)>;

// Networks drawn in order from one generator seeded with `seed`.
std::vector<MlpModel> init_models(const std::vector<MlpSpec>& specs, std::uint64_t seed);

// Mini-batch Adam (one optimiser state per model). Epoch e visits the items
// in the order of a Fisher-Yates permutation drawn from Rng(seed + e), in
// contiguous batches of batch_size; the last batch may be smaller.
std::vector<EpochRecord> train(std::vector<MlpModel>& models, std::size_t n_items, const TrainOptions& opts,
                               const BatchObjective& objective, const EpochCallback& on_epoch = {});

// models = {encoder, decoder}
std::vector<EpochRecord> train_autoencoder(std::vector<MlpModel>& models, std::span<const Point2> points,
                                           const TrainOptions& opts, const EpochCallback& on_epoch = {});
std::vector<EpochRecord> train_lagged_autoencoder(std::vector<MlpModel>& models, std::span<const StatePair> pairs,
                                                  const TrainOptions& opts, const EpochCallback& on_epoch = {});
// Variances and covariances are taken over the x-components of each batch.
std::vector<EpochRecord> train_eigen_transfer(std::vector<MlpModel>& models, std::span<const StatePair> pairs,
                                              const EigenLossConfig& cfg, const TrainOptions& opts,
                                              const EpochCallback& on_epoch = {});
std::vector<EpochRecord> train_eigen_generator(std::vector<MlpModel>& models, std::span<const Point2> points,
                                               const EigenLossConfig& cfg, const TrainOptions& opts,
                                               const EpochCallback& on_epoch = {});

}  // namespace slowcv

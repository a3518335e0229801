#include "slowcv/training.hpp"

#include "slowcv/error.hpp"

#include <algorithm>
#include <cmath>

namespace slowcv {

namespace {

template <class T>
std::vector<T> gather(std::span<const T> items, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(items[i]);
  return out;
}

LossTerms reconstruction_terms(double loss) {
  LossTerms t;
  t.total = loss;
  t.spectral = loss;
  return t;
}

}  // namespace

std::vector<MlpModel> init_models(const std::vector<MlpSpec>& specs, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<MlpModel> out;
  for (const auto& s : specs) out.push_back(MlpModel::init(s, rng));
  return out;
}

std::vector<EpochRecord> train(std::vector<MlpModel>& models, std::size_t n_items, const TrainOptions& opts,
                               const BatchObjective& objective, const EpochCallback& on_epoch) {
  if (n_items == 0) throw Error(Errc::too_few_samples, "train: empty dataset");
  if (opts.batch_size < 1 || opts.epochs < 1 || !(opts.lr > 0.0)) {
    throw Error(Errc::invalid_argument, "train: batch_size, epochs and lr must be positive");
  }
  std::vector<AdamState> states;
  for (const auto& m : models) states.emplace_back(m.params().size(), AdamConfig{.lr = opts.lr});

  const auto batch = static_cast<std::size_t>(opts.batch_size);
  std::vector<EpochRecord> history;
  ModelGrads grads;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    Rng rng(opts.seed + static_cast<std::uint64_t>(epoch));
    const std::vector<std::size_t> order = rng.permutation(n_items);
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < n_items; start += batch) {
      const std::size_t len = std::min(batch, n_items - start);
      const LossTerms t = objective(std::span<const std::size_t>(order).subspan(start, len), grads);
      if (grads.size() != models.size()) throw Error(Errc::dimension_mismatch, "train: one gradient per model");
      for (std::size_t m = 0; m < models.size(); ++m) adam_step(models[m].params(), grads[m], states[m]);

      const double w = static_cast<double>(len) / static_cast<double>(n_items);
      rec.loss += w * t.total;
      rec.spectral += w * t.spectral;
      rec.penalty += w * t.penalty;
      if (rec.variance.size() != static_cast<std::size_t>(t.variance.size())) rec.variance.assign(t.variance.size(), 0.0);
      for (Eigen::Index i = 0; i < t.variance.size(); ++i) rec.variance[static_cast<std::size_t>(i)] += w * t.variance[i];
    }
    if (!std::isfinite(rec.loss)) throw Error(Errc::diverged, "training loss became non-finite");
    if (on_epoch) on_epoch(rec);
    history.push_back(std::move(rec));
  }
  return history;
}

std::vector<EpochRecord> train_autoencoder(std::vector<MlpModel>& models, std::span<const Point2> points,
                                           const TrainOptions& opts, const EpochCallback& on_epoch) {
  if (models.size() != 2) throw Error(Errc::invalid_argument, "autoencoder training needs {encoder, decoder}");
  return train(
      models, points.size(), opts,
      [&](std::span<const std::size_t> idx, ModelGrads& g) {
        const auto b = gather(points, idx);
        return reconstruction_terms(ae_loss(models[0], models[1], b, &g));
      },
      on_epoch);
}

std::vector<EpochRecord> train_lagged_autoencoder(std::vector<MlpModel>& models, std::span<const StatePair> pairs,
                                                  const TrainOptions& opts, const EpochCallback& on_epoch) {
  if (models.size() != 2) throw Error(Errc::invalid_argument, "autoencoder training needs {encoder, decoder}");
  return train(
      models, pairs.size(), opts,
      [&](std::span<const std::size_t> idx, ModelGrads& g) {
        const auto b = gather(pairs, idx);
        return reconstruction_terms(tlae_loss(models[0], models[1], b, &g));
      },
      on_epoch);
}

std::vector<EpochRecord> train_eigen_transfer(std::vector<MlpModel>& models, std::span<const StatePair> pairs,
                                              const EigenLossConfig& cfg, const TrainOptions& opts,
                                              const EpochCallback& on_epoch) {
  cfg.validate();
  return train(
      models, pairs.size(), opts,
      [&](std::span<const std::size_t> idx, ModelGrads& g) {
        const auto b = gather(pairs, idx);
        return eigen_transfer_loss(models, b, cfg, &g);
      },
      on_epoch);
}

std::vector<EpochRecord> train_eigen_generator(std::vector<MlpModel>& models, std::span<const Point2> points,
                                               const EigenLossConfig& cfg, const TrainOptions& opts,
                                               const EpochCallback& on_epoch) {
  cfg.validate();
  return train(
      models, points.size(), opts,
      [&](std::span<const std::size_t> idx, ModelGrads& g) {
        const auto b = gather(points, idx);
        return eigen_generator_loss(models, b, cfg, &g);
      },
      on_epoch);
}

}  // namespace slowcv

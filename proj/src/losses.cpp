#include "slowcv/losses.hpp"

#include "slowcv/error.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace slowcv {

namespace {

// Batches are processed in fixed-size column blocks; partial sums are
// combined in block order so results do not depend on batch layout in memory.
constexpr std::size_t kChunk = 4096;

template <typename Fn>
void for_each_chunk(std::size_t n, Fn&& fn) {
  for (std::size_t begin = 0; begin < n; begin += kChunk) fn(begin, std::min(n, begin + kChunk));
}

Eigen::Matrix2Xd gather(std::span<const Point2> points, std::size_t begin, std::size_t end) {
  return to_columns(points.subspan(begin, end - begin));
}

Eigen::Matrix2Xd gather_x(std::span<const StatePair> pairs, std::size_t begin, std::size_t end) {
  Eigen::Matrix2Xd out(2, static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i) out.col(static_cast<Eigen::Index>(i - begin)) = pairs[i].x;
  return out;
}

Eigen::Matrix2Xd gather_y(std::span<const StatePair> pairs, std::size_t begin, std::size_t end) {
  Eigen::Matrix2Xd out(2, static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i) out.col(static_cast<Eigen::Index>(i - begin)) = pairs[i].y;
  return out;
}

void check_scalar_models(std::span<const MlpModel> models, const EigenLossConfig& cfg) {
  if (static_cast<int>(models.size()) != cfg.k) {
    throw Error(Errc::dimension_mismatch, fmt::format("eigen loss: k={} but {} models given", cfg.k, models.size()));
  }
  for (const auto& m : models) {
    if (m.spec().input_dim() != 2 || m.spec().output_dim() != 1) {
      throw Error(Errc::dimension_mismatch, "eigen loss: models must map R^2 -> R");
    }
  }
}

// Scalar outputs of `model` on a point set, as a row vector.
Eigen::RowVectorXd evaluate(const MlpModel& model, std::span<const Point2> points) {
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(points.size()));
  for_each_chunk(points.size(), [&](std::size_t b, std::size_t e) {
    out.segment(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e - b)) =
        model.forward_batch(gather(points, b, e));
  });
  return out;
}

// Covariance penalty and its adjoint. Returns the penalty value and fills
// `dcov` (k x k, upper triangle meaningful) with d penalty / d Cov_ab.
double covariance_penalty(const Eigen::MatrixXd& cov, double alpha, Eigen::MatrixXd& dcov) {
  const Eigen::Index k = cov.rows();
  dcov = Eigen::MatrixXd::Zero(k, k);
  double penalty = 0.0;
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a; b < k; ++b) {
      const double r = cov(a, b) - (a == b ? 1.0 : 0.0);
      penalty += r * r;
      dcov(a, b) = 2.0 * alpha * r;
    }
  }
  return alpha * penalty;
}

// d L / d f_a(s) for every stats sample, given d L / d Cov_ab on the upper
// triangle: sum_b K_ab (f_b(s) - m_b) / N, K_aa = 2 D_aa, K_ab = K_ba = D_ab.
Eigen::MatrixXd stats_adjoint(const Eigen::MatrixXd& dcov, const Eigen::MatrixXd& values,
                              const Eigen::VectorXd& mean) {
  const Eigen::Index k = dcov.rows();
  Eigen::MatrixXd kmat(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    kmat(a, a) = 2.0 * dcov(a, a);
    for (Eigen::Index b = a + 1; b < k; ++b) kmat(a, b) = kmat(b, a) = dcov(a, b);
  }
  const Eigen::MatrixXd centered = values.colwise() - mean;
  return kmat * centered / static_cast<double>(values.cols());
}

// Backpropagates a per-sample output adjoint (1 x n) through `model`.
void accumulate(const MlpModel& model, std::span<const Point2> points, const Eigen::RowVectorXd& adjoint,
                std::vector<double>& grad) {
  for_each_chunk(points.size(), [&](std::size_t b, std::size_t e) {
    const Tape tape = record(model, gather(points, b, e));
    const Eigen::MatrixXd adj = adjoint.segment(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e - b));
    backpropagate(model, tape, adj, nullptr, grad);
  });
}

std::vector<Point2> xs_of(std::span<const StatePair> pairs) {
  std::vector<Point2> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.x);
  return out;
}

std::vector<Point2> ys_of(std::span<const StatePair> pairs) {
  std::vector<Point2> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.y);
  return out;
}

void init_grads(ModelGrads* grads, std::span<const MlpModel> models) {
  if (!grads) return;
  grads->assign(models.size(), {});
  for (std::size_t i = 0; i < models.size(); ++i) (*grads)[i].assign(models[i].params().size(), 0.0);
}

LossTerms transfer_loss_impl(std::span<const MlpModel> models, std::span<const StatePair> pairs,
                             const std::vector<Point2>* stats_points, const EigenLossConfig& cfg,
                             ModelGrads* grads) {
  cfg.validate();
  check_scalar_models(models, cfg);
  if (pairs.empty()) throw Error(Errc::too_few_samples, "eigen_transfer_loss: empty pair batch");
  if (!(cfg.tau > 0.0)) throw Error(Errc::invalid_argument, "eigen_transfer_loss: tau must be positive");

  const std::vector<Point2> xs = xs_of(pairs);
  const std::vector<Point2> ys = ys_of(pairs);
  const std::vector<Point2>& stats_pts = stats_points ? *stats_points : xs;
  const auto k = static_cast<Eigen::Index>(cfg.k);
  const auto npairs = static_cast<Eigen::Index>(pairs.size());

  Eigen::MatrixXd fx(k, npairs), fy(k, npairs);
  Eigen::MatrixXd fs(k, static_cast<Eigen::Index>(stats_pts.size()));
  for (Eigen::Index i = 0; i < k; ++i) {
    fx.row(i) = evaluate(models[i], xs);
    fy.row(i) = evaluate(models[i], ys);
    fs.row(i) = stats_points ? evaluate(models[i], stats_pts) : Eigen::RowVectorXd(fx.row(i));
  }
  const EmpiricalStats stats = empirical_stats(fs);
  const Eigen::MatrixXd diff = fy - fx;
  const Eigen::VectorXd energy = diff.array().square().rowwise().mean();  // mean |f(y) - f(x)|^2

  LossTerms out;
  out.variance = stats.variance();
  Eigen::MatrixXd dcov;
  out.penalty = covariance_penalty(stats.covariance, cfg.alpha, dcov);
  Eigen::VectorXd coef(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double denom = out.variance[i] + cfg.var_guard;
    coef[i] = cfg.omegas[static_cast<std::size_t>(i)] / (2.0 * cfg.tau * denom);
    out.spectral += coef[i] * energy[i];
    dcov(i, i) -= coef[i] * energy[i] / denom;
  }
  out.total = out.spectral + out.penalty;
  if (!grads) return out;

  init_grads(grads, models);
  const Eigen::MatrixXd stats_adj = stats_adjoint(dcov, fs, stats.mean);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::RowVectorXd dy = (2.0 * coef[i] / static_cast<double>(npairs)) * diff.row(i);
    Eigen::RowVectorXd dx = -dy;
    if (!stats_points) dx += stats_adj.row(i);
    auto& g = (*grads)[static_cast<std::size_t>(i)];
    accumulate(models[i], xs, dx, g);
    accumulate(models[i], ys, dy, g);
    if (stats_points) accumulate(models[i], stats_pts, stats_adj.row(i), g);
  }
  return out;
}

void check_autoencoder(const MlpModel& enc, const MlpModel& dec) {
  if (enc.spec().input_dim() != 2 || dec.spec().output_dim() != 2 ||
      enc.spec().output_dim() != dec.spec().input_dim()) {
    throw Error(Errc::dimension_mismatch,
                fmt::format("autoencoder shapes do not chain: enc {}->{}, dec {}->{}", enc.spec().input_dim(),
                            enc.spec().output_dim(), dec.spec().input_dim(), dec.spec().output_dim()));
  }
}

// Shared body of ae_loss / tlae_loss: inputs and reconstruction targets.
double reconstruction_loss(const MlpModel& enc, const MlpModel& dec, std::span<const Point2> inputs,
                           std::span<const Point2> targets, ModelGrads* grads) {
  check_autoencoder(enc, dec);
  if (inputs.empty()) throw Error(Errc::too_few_samples, "reconstruction loss: empty batch");
  if (grads) {
    grads->assign(2, {});
    (*grads)[0].assign(enc.params().size(), 0.0);
    (*grads)[1].assign(dec.params().size(), 0.0);
  }
  const double n = static_cast<double>(inputs.size());
  double sum = 0.0;
  for_each_chunk(inputs.size(), [&](std::size_t b, std::size_t e) {
    const Tape enc_tape = record(enc, gather(inputs, b, e));
    const Tape dec_tape = record(dec, enc_tape.output());
    const Eigen::MatrixXd resid = dec_tape.output() - gather(targets, b, e);
    sum += resid.squaredNorm();
    if (grads) {
      const Eigen::MatrixXd zbar = backpropagate(dec, dec_tape, (2.0 / n) * resid, nullptr, (*grads)[1]);
      backpropagate(enc, enc_tape, zbar, nullptr, (*grads)[0]);
    }
  });
  return sum / n;
}

}  // namespace

EmpiricalStats empirical_stats(const Eigen::MatrixXd& values) {
  if (values.cols() < 2) throw Error(Errc::too_few_samples, "empirical_stats: need at least 2 samples");
  EmpiricalStats s;
  s.mean = values.rowwise().mean();
  const Eigen::MatrixXd centered = values.colwise() - s.mean;
  s.covariance = centered * centered.transpose() / static_cast<double>(values.cols());
  return s;
}

void EigenLossConfig::validate() const {
  if (k < 1) throw Error(Errc::invalid_argument, "eigen loss: k must be >= 1");
  if (static_cast<int>(omegas.size()) != k) {
    throw Error(Errc::invalid_argument, fmt::format("eigen loss: {} omegas for k={}", omegas.size(), k));
  }
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!(omegas[i] > 0.0)) throw Error(Errc::invalid_argument, "eigen loss: omegas must be positive");
    if (i > 0 && omegas[i] > omegas[i - 1]) throw Error(Errc::invalid_argument, "eigen loss: omegas must be non-increasing");
  }
  if (alpha < 0.0) throw Error(Errc::invalid_argument, "eigen loss: alpha must be >= 0");
  if (!(var_guard > 0.0)) throw Error(Errc::invalid_argument, "eigen loss: var_guard must be positive");
}

LossTerms eigen_generator_loss(std::span<const MlpModel> models, std::span<const Point2> batch,
                               const EigenLossConfig& cfg, ModelGrads* grads) {
  cfg.validate();
  check_scalar_models(models, cfg);
  if (!(cfg.beta > 0.0)) throw Error(Errc::invalid_argument, "eigen_generator_loss: beta must be positive");
  const auto k = static_cast<Eigen::Index>(cfg.k);
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (n < 2) throw Error(Errc::too_few_samples, "eigen_generator_loss: need at least 2 samples");

  Eigen::MatrixXd f(k, n);
  std::vector<Eigen::Matrix2Xd> grad_f(static_cast<std::size_t>(k), Eigen::Matrix2Xd(2, n));
  for (Eigen::Index i = 0; i < k; ++i) {
    for_each_chunk(batch.size(), [&](std::size_t b, std::size_t e) {
      const auto cb = static_cast<Eigen::Index>(b);
      const auto cn = static_cast<Eigen::Index>(e - b);
      const Tape tape = record(models[i], gather(batch, b, e));
      f.row(i).segment(cb, cn) = tape.output();
      grad_f[static_cast<std::size_t>(i)].middleCols(cb, cn) =
          backpropagate(models[i], tape, Eigen::MatrixXd::Ones(1, cn), nullptr, {});
    });
  }
  const EmpiricalStats stats = empirical_stats(f);

  LossTerms out;
  out.variance = stats.variance();
  Eigen::MatrixXd dcov;
  out.penalty = covariance_penalty(stats.covariance, cfg.alpha, dcov);
  Eigen::VectorXd coef(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double mean_sq_grad = grad_f[static_cast<std::size_t>(i)].colwise().squaredNorm().mean();
    const double denom = out.variance[i] + cfg.var_guard;
    coef[i] = cfg.omegas[static_cast<std::size_t>(i)] / (cfg.beta * denom);
    out.spectral += coef[i] * mean_sq_grad;
    dcov(i, i) -= coef[i] * mean_sq_grad / denom;
  }
  out.total = out.spectral + out.penalty;
  if (!grads) return out;

  // d/dtheta of a(s) f(x_s) + c(s) . grad f(x_s), with the second term taken
  // as the tangent of f along direction c(s).
  init_grads(grads, models);
  const Eigen::MatrixXd adj = stats_adjoint(dcov, f, stats.mean);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Matrix2Xd dirs = (2.0 * coef[i] / static_cast<double>(n)) * grad_f[static_cast<std::size_t>(i)];
    for_each_chunk(batch.size(), [&](std::size_t b, std::size_t e) {
      const auto cb = static_cast<Eigen::Index>(b);
      const auto cn = static_cast<Eigen::Index>(e - b);
      const Eigen::MatrixXd tangent_in = dirs.middleCols(cb, cn);
      const Tape tape = record(models[i], gather(batch, b, e), &tangent_in);
      const Eigen::MatrixXd out_adj = adj.row(i).segment(cb, cn);
      const Eigen::MatrixXd tan_adj = Eigen::MatrixXd::Ones(1, cn);
      backpropagate(models[i], tape, out_adj, &tan_adj, (*grads)[static_cast<std::size_t>(i)]);
    });
  }
  return out;
}

LossTerms eigen_transfer_loss(std::span<const MlpModel> models, std::span<const StatePair> pairs,
                              std::span<const Point2> stats_batch, const EigenLossConfig& cfg, ModelGrads* grads) {
  const std::vector<Point2> stats(stats_batch.begin(), stats_batch.end());
  return transfer_loss_impl(models, pairs, &stats, cfg, grads);
}

LossTerms eigen_transfer_loss(std::span<const MlpModel> models, std::span<const StatePair> pairs,
                              const EigenLossConfig& cfg, ModelGrads* grads) {
  return transfer_loss_impl(models, pairs, nullptr, cfg, grads);
}

double ae_loss(const MlpModel& enc, const MlpModel& dec, std::span<const Point2> batch, ModelGrads* grads) {
  return reconstruction_loss(enc, dec, batch, batch, grads);
}

double tlae_loss(const MlpModel& enc, const MlpModel& dec, std::span<const StatePair> pairs, ModelGrads* grads) {
  const std::vector<Point2> xs = xs_of(pairs);
  const std::vector<Point2> ys = ys_of(pairs);
  return reconstruction_loss(enc, dec, xs, ys, grads);
}

}  // namespace slowcv

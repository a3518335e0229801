#include "slowcv/experiment.hpp"

#include "slowcv/csv.hpp"
#include "slowcv/effective.hpp"
#include "slowcv/error.hpp"
#include "slowcv/generator.hpp"
#include "slowcv/mep.hpp"
#include "slowcv/pca.hpp"
#include "slowcv/training.hpp"
#include "slowcv/ulam.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace slowcv {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr Eigen::Index kChunk = 4096;
constexpr int kCurvePoints = 256;

// Timestamped progress lines: always to run.log, to stderr unless quiet.
class RunLog {
 public:
  RunLog(const fs::path& path, bool quiet) : out_(path), quiet_(quiet), start_(std::chrono::steady_clock::now()) {
    if (!out_) throw Error(Errc::io, "cannot open " + path.string());
  }

  template <class... Args>
  void operator()(fmt::format_string<Args...> f, Args&&... args) {
    const std::string msg = fmt::format(f, std::forward<Args>(args)...);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    out_ << fmt::format("{:%Y-%m-%dT%H:%M:%S} +{:.1f}s {}\n", fmt::localtime(std::time(nullptr)), secs, msg);
    out_.flush();
    if (!quiet_) fmt::print(stderr, "[{:7.1f}s] {}\n", secs, msg);
  }

 private:
  std::ofstream out_;
  bool quiet_;
  std::chrono::steady_clock::time_point start_;
};

// Outputs of all models on all points, stacked (sum of output dims x N).
Eigen::MatrixXd evaluate_models(std::span<const MlpModel> models, std::span<const Point2> points) {
  int rows = 0;
  for (const auto& m : models) rows += m.spec().output_dim();
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd out(rows, n);
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - start);
    const Eigen::Matrix2Xd x =
        to_columns(points.subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(len)));
    int row = 0;
    for (const auto& m : models) {
      const int d = m.spec().output_dim();
      out.block(row, start, d, len) = m.forward_batch(x);
      row += d;
    }
  }
  return out;
}

double variance_of(const Eigen::RowVectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().mean();
}

void check_variance(double var, double guard, std::size_t i) {
  if (var < 10.0 * guard) {
    throw Error(Errc::degenerate_variance,
                fmt::format("eigenvalue estimate: variance of f{} is {:.3e} (< 10 var_guard)", i + 1, var));
  }
}

std::vector<Point2> grid_points(const Domain& d, int n1, int n2) {
  if (n1 < 2 || n2 < 2) throw Error(Errc::invalid_argument, "export grid needs at least 2 nodes per axis");
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2));
  for (int i2 = 0; i2 < n2; ++i2) {
    for (int i1 = 0; i1 < n1; ++i1) {
      pts.emplace_back(d.x1_min + (d.x1_max - d.x1_min) * i1 / (n1 - 1),
                       d.x2_min + (d.x2_max - d.x2_min) * i2 / (n2 - 1));
    }
  }
  return pts;
}

void write_table(const fs::path& path, std::span<const Point2> pts, const Eigen::MatrixXd& values) {
  std::vector<std::string> header{"x1", "x2"};
  if (values.rows() == 1) {
    header.emplace_back("v");
  } else {
    for (Eigen::Index r = 0; r < values.rows(); ++r) header.push_back(fmt::format("v{}", r + 1));
  }
  CsvWriter csv(path, header);
  std::vector<double> row(header.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    row[0] = pts[i][0];
    row[1] = pts[i][1];
    for (Eigen::Index r = 0; r < values.rows(); ++r) row[2 + r] = values(r, static_cast<Eigen::Index>(i));
    csv.row(row);
  }
}

json metrics_json(const std::vector<EpochRecord>& history, bool spectral) {
  json arr = json::array();
  for (const auto& r : history) {
    json rec{{"epoch", r.epoch}, {"loss", r.loss}, {"penalty", r.penalty}};
    if (spectral) {
      rec["spectral"] = r.spectral;
      rec["variance"] = r.variance;
    }
    arr.push_back(std::move(rec));
  }
  return arr;
}

json estimates_json(const std::vector<EigenEstimate>& est) {
  json arr = json::array();
  for (const auto& e : est) {
    json j{{"variance", e.variance}, {"energy", e.energy}, {"lambda", e.lambda}};
    if (std::isfinite(e.nu)) j["nu"] = e.nu;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

EigenLossConfig loss_config(const ExperimentConfig& cfg, double tau) {
  EigenLossConfig lc;
  lc.k = cfg.training.k;
  lc.omegas = cfg.training.omegas;
  lc.alpha = cfg.training.alpha;
  lc.beta = cfg.beta;
  lc.tau = tau;
  lc.var_guard = cfg.training.var_guard;
  return lc;
}

TrainOptions train_options(const ExperimentConfig& cfg) {
  return {cfg.training.lr, cfg.training.batch_size, cfg.training.epochs, cfg.training.seed};
}

std::vector<MlpSpec> model_specs(const ExperimentConfig& cfg) {
  if (cfg.task == Task::train_ae || cfg.task == Task::train_tlae) {
    return {MlpSpec{cfg.architecture.encoder}, MlpSpec{cfg.architecture.decoder}};
  }
  return std::vector<MlpSpec>(static_cast<std::size_t>(cfg.training.k), MlpSpec{cfg.architecture.eigen});
}

std::vector<std::string> model_files(const ExperimentConfig& cfg) {
  if (cfg.task == Task::train_ae || cfg.task == Task::train_tlae) return {"encoder.json", "decoder.json"};
  std::vector<std::string> out;
  for (int i = 1; i <= cfg.training.k; ++i) out.push_back(fmt::format("f{}.json", i));
  return out;
}

bool is_autoencoder(Task t) { return t == Task::train_ae || t == Task::train_tlae; }

// Smallest nonzero generator eigenvalue on the reference grid.
double reference_lambda1(const ExperimentConfig& cfg, const Potential& pot) {
  const oracle::Grid2D grid(pot.default_domain(), 161, 161, pot, Thermo(cfg.beta));
  return oracle::leading_eigs(oracle::fd_generator(grid), grid, 2).values[1];
}

json autoencoder_report(const ExperimentConfig& cfg, const std::vector<MlpModel>& models, const Dataset& data,
                        const fs::path& out) {
  const Potential pot = cfg.make_potential();
  const auto p = oracle::pca(data.points, 1);
  const auto& r = cfg.exports.resolution;
  export_grid(out / "grid.csv", std::span<const MlpModel>(models.data(), 1), pot.default_domain(), r[0], r[1]);
  export_decoder_curve(out / "decoder_curve.csv", models[0], models[1], data.points);
  return {{"reconstruction_loss", ae_loss(models[0], models[1], data.points)},
          {"pca_residual_per_point", p.residual / static_cast<double>(data.size())}};
}

json eigen_report(const ExperimentConfig& cfg, Task trained, const std::vector<MlpModel>& models, const Dataset& data,
                  const fs::path& out, RunLog& log) {
  const Potential pot = cfg.make_potential();
  const auto& r = cfg.exports.resolution;
  export_grid(out / "grid.csv", models, pot.default_domain(), r[0], r[1]);
  json j;
  if (trained == Task::train_eigen_transfer) {
    const PairDataset pairs = lagged_pairs(data, cfg.lag_steps());
    j["estimates"] = estimates_json(
        eigenvalue_estimate_transfer(models, data.points, pairs.pairs, pairs.tau, cfg.training.var_guard));
    j["tau"] = pairs.tau;
  } else {
    j["estimates"] = estimates_json(eigenvalue_estimate_generator(models, data.points, cfg.beta, cfg.training.var_guard));
  }
  log("reference spectrum on a 161x161 grid");
  const double lambda1 = reference_lambda1(cfg, pot);
  j["reference_lambda1"] = lambda1;
  if (j.contains("tau")) j["reference_nu1"] = std::exp(-j["tau"].get<double>() * lambda1);
  return j;
}

json run_training(const ExperimentConfig& cfg, const Dataset& data, const fs::path& out, RunLog& log) {
  std::vector<MlpModel> models = init_models(model_specs(cfg), cfg.training.seed);
  const TrainOptions opts = train_options(cfg);
  const int every = std::max(1, cfg.training.epochs / 20);
  const EpochCallback progress = [&](const EpochRecord& r) {
    if (r.epoch % every == 0 || r.epoch + 1 == cfg.training.epochs) {
      log("epoch {:5d}  loss {:.6e}  penalty {:.3e}", r.epoch, r.loss, r.penalty);
    }
  };

  std::vector<EpochRecord> history;
  json summary;
  switch (cfg.task) {
    case Task::train_ae:
      history = train_autoencoder(models, data.points, opts, progress);
      break;
    case Task::train_tlae: {
      const PairDataset pairs = lagged_pairs(data, cfg.lag_steps());
      summary["lag"] = pairs.lag;
      summary["tau"] = pairs.tau;
      history = train_lagged_autoencoder(models, pairs.pairs, opts, progress);
      summary["tlae_loss"] = tlae_loss(models[0], models[1], pairs.pairs);
      break;
    }
    case Task::train_eigen_transfer: {
      const PairDataset pairs = lagged_pairs(data, cfg.lag_steps());
      summary["lag"] = pairs.lag;
      summary["tau"] = pairs.tau;
      history = train_eigen_transfer(models, pairs.pairs, loss_config(cfg, pairs.tau), opts, progress);
      break;
    }
    case Task::train_eigen_generator:
      history = train_eigen_generator(models, data.points, loss_config(cfg, 1.0), opts, progress);
      break;
    default:
      throw Error(Errc::invalid_argument, "run_training: not a training task");
  }

  write_json(out / "metrics.json", metrics_json(history, !is_autoencoder(cfg.task)));
  const auto files = model_files(cfg);
  for (std::size_t i = 0; i < models.size(); ++i) save_model(out / files[i], models[i]);

  summary["final_loss"] = history.back().loss;
  summary["final_penalty"] = history.back().penalty;
  summary["models"] = files;
  if (is_autoencoder(cfg.task)) {
    summary.update(autoencoder_report(cfg, models, data, out));
  } else {
    summary["final_variance"] = history.back().variance;
    summary.update(eigen_report(cfg, cfg.task, models, data, out, log));
  }
  return summary;
}

json run_oracle(const ExperimentConfig& cfg, const fs::path& out, RunLog& log) {
  const Potential pot = cfg.make_potential();
  const Thermo thermo(cfg.beta);
  const auto& res = cfg.oracle.resolution;
  const oracle::Grid2D grid(pot.default_domain(), res[0], res[1], pot, thermo);
  log("finite-difference generator on {}x{} nodes", res[0], res[1]);
  const auto op = oracle::fd_generator(grid);
  const auto eig = oracle::leading_eigs(op, grid, cfg.oracle.eigenpairs);
  oracle::export_eigen(out / "eigenfunctions.csv", grid, eig);

  json j{{"eigenvalues", to_vector(eig.values)}, {"iterations", eig.iterations}, {"max_residual", eig.max_residual}};
  log("resolution check");
  const auto rc = oracle::resolution_check(grid);
  j["resolution_check"] = {{"lambda1_coarse", rc.lambda1_coarse},
                           {"lambda1_fine", rc.lambda1_fine},
                           {"relative_change", rc.relative_change},
                           {"too_coarse", rc.too_coarse}};
  if (rc.too_coarse) log("warning: grid too coarse (lambda1 changes by {:.1f}% on refinement)", 100 * rc.relative_change);

  if (cfg.sampling) {
    const Dataset data = make_dataset(cfg);
    write_dataset(out / "dataset.csv", data,
                  {cfg.sampling->dt, cfg.sampling->stride, cfg.sampling->seed, cfg.potential, cfg.epsilon, cfg.beta});
    const PairDataset pairs = lagged_pairs(data, lag_steps(cfg.oracle.tau, data.effective_dt()));
    const oracle::BinSpec bins{pot.default_domain(), cfg.oracle.bins[0], cfg.oracle.bins[1]};
    const auto model = oracle::ulam_transfer(pairs, bins);
    if (model.dropped_pairs > 0) {
      log("warning: {} bins without outgoing pairs dropped ({} pairs)", model.dropped_bins.size(), model.dropped_pairs);
    }
    const int m = std::min<int>(cfg.oracle.eigenpairs, static_cast<int>(model.size()));
    const auto teig = oracle::transfer_eigs(model, m, std::max(0, model.row_of(bins.label(Point2(1.0, 0.0)))));
    oracle::export_ulam(out / "ulam.csv", bins, model, teig);
    std::vector<double> implied;
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(eig.values.size(), m); ++i) {
      implied.push_back(std::exp(-pairs.tau * eig.values[i]));
    }
    j["ulam"] = {{"tau", pairs.tau},
                 {"eigenvalues", to_vector(teig.values)},
                 {"implied_by_generator", implied},
                 {"bins_kept", model.size()},
                 {"dropped_pairs", model.dropped_pairs}};
  }
  return j;
}

json run_mep(const ExperimentConfig& cfg, const fs::path& out, RunLog& log) {
  const Potential pot = cfg.make_potential();
  const Path path = string_method(pot, cfg.mep_a, cfg.mep_b, cfg.mep);
  write_path(out / "path.csv", path);
  {
    CsvWriter csv(out / "path_energy.csv", {"iteration", "max_v"});
    for (std::size_t i = 0; i < path.max_energy.size(); ++i) csv.row({static_cast<double>(i + 1), path.max_energy[i]});
  }
  if (!path.converged) log("warning: string method stopped after {} iterations without converging", path.iterations);
  return {{"converged", path.converged},
          {"iterations", path.iterations},
          {"max_energy", path.max_energy.empty() ? pot.value(cfg.mep_a) : path.max_energy.back()}};
}

json run_evaluate(const ExperimentConfig& cfg, const fs::path& out, RunLog& log) {
  const fs::path dir = *cfg.model_dir;
  const ExperimentConfig trained = load_config(dir / "config.json");
  if (trained.task == Task::oracle_report || trained.task == Task::mep || trained.task == Task::evaluate) {
    throw Error(Errc::config, fmt::format("{}: not a training run", dir.string()));
  }
  std::vector<MlpModel> models;
  for (const auto& f : model_files(trained)) models.push_back(load_model(dir / f));
  log("loaded {} model(s) from {}", models.size(), dir.string());

  // Estimates use the evaluation config's data and the trained loss settings.
  ExperimentConfig eval = trained;
  eval.sampling = cfg.sampling;
  eval.exports = cfg.exports;
  eval.beta = cfg.beta;
  const Dataset data = make_dataset(eval);
  json j{{"trained_task", task_name(trained.task)}, {"points", data.size()}};
  if (is_autoencoder(trained.task)) {
    j.update(autoencoder_report(eval, models, data, out));
  } else {
    j.update(eigen_report(eval, trained.task, models, data, out, log));
  }
  return j;
}

}  // namespace

std::vector<EigenEstimate> eigenvalue_estimate_transfer(std::span<const MlpModel> models,
                                                        std::span<const Point2> points,
                                                        std::span<const StatePair> pairs, double tau,
                                                        double var_guard) {
  if (!(tau > 0.0)) throw Error(Errc::invalid_argument, "eigenvalue estimate: tau must be > 0");
  if (points.size() < 2 || pairs.empty()) throw Error(Errc::too_few_samples, "eigenvalue estimate: not enough data");
  const Eigen::MatrixXd f = evaluate_models(models, points);
  std::vector<Point2> xs, ys;
  xs.reserve(pairs.size());
  ys.reserve(pairs.size());
  for (const auto& p : pairs) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  const Eigen::MatrixXd fx = evaluate_models(models, xs);
  const Eigen::MatrixXd fy = evaluate_models(models, ys);
  std::vector<EigenEstimate> out;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    EigenEstimate e;
    e.variance = variance_of(f.row(i));
    check_variance(e.variance, var_guard, static_cast<std::size_t>(i));
    e.energy = 0.5 * (fy.row(i) - fx.row(i)).array().square().mean();
    e.nu = 1.0 - e.energy / e.variance;
    e.lambda = (1.0 - e.nu) / tau;
    out.push_back(e);
  }
  return out;
}

std::vector<EigenEstimate> eigenvalue_estimate_generator(std::span<const MlpModel> models,
                                                         std::span<const Point2> points, double beta,
                                                         double var_guard) {
  if (points.size() < 2) throw Error(Errc::too_few_samples, "eigenvalue estimate: not enough data");
  std::vector<EigenEstimate> out;
  const auto n = static_cast<Eigen::Index>(points.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    const Eigen::MatrixXd f = evaluate_models(models.subspan(i, 1), points);
    EigenEstimate e;
    e.variance = variance_of(f.row(0));
    check_variance(e.variance, var_guard, i);
    double sq = 0.0;
    for (Eigen::Index start = 0; start < n; start += kChunk) {
      const Eigen::Index len = std::min(kChunk, n - start);
      const Eigen::Matrix2Xd x =
          to_columns(points.subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(len)));
      sq += input_gradients(models[i], x).colwise().squaredNorm().sum();
    }
    e.energy = sq / static_cast<double>(n) / beta;
    e.nu = std::numeric_limits<double>::quiet_NaN();
    e.lambda = e.energy / e.variance;
    out.push_back(e);
  }
  return out;
}

void export_grid(const fs::path& csv_path, std::span<const MlpModel> models, const Domain& domain, int n1, int n2) {
  const auto pts = grid_points(domain, n1, n2);
  write_table(csv_path, pts, evaluate_models(models, pts));
}

void export_grid(const fs::path& csv_path, const oracle::Grid2D& grid, const oracle::GridFunction& f,
                 const Domain& domain, int n1, int n2) {
  const auto pts = grid_points(domain, n1, n2);
  Eigen::MatrixXd v(1, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) v(0, static_cast<Eigen::Index>(i)) = oracle::interpolate(grid, f, pts[i]);
  write_table(csv_path, pts, v);
}

void export_decoder_curve(const fs::path& csv_path, const MlpModel& enc, const MlpModel& dec,
                          std::span<const Point2> points) {
  if (enc.spec().output_dim() != 1 || dec.spec().input_dim() != 1) {
    throw Error(Errc::dimension_mismatch, "decoder curve needs a one-dimensional latent space");
  }
  if (points.empty()) throw Error(Errc::too_few_samples, "decoder curve: no data");
  const Eigen::MatrixXd z = evaluate_models(std::span<const MlpModel>(&enc, 1), points);
  std::vector<double> sorted(z.data(), z.data() + z.size());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::llround(q * static_cast<double>(sorted.size() - 1)));
    return sorted[idx];
  };
  const double lo = quantile(0.01);
  const double hi = quantile(0.99);
  Eigen::MatrixXd zs(1, kCurvePoints);
  for (int i = 0; i < kCurvePoints; ++i) zs(0, i) = lo + (hi - lo) * i / (kCurvePoints - 1);
  const Eigen::MatrixXd y = dec.forward_batch(zs);
  CsvWriter csv(csv_path, {"z", "y1", "y2"});
  for (int i = 0; i < kCurvePoints; ++i) csv.row({zs(0, i), y(0, i), y(1, i)});
}

Dataset make_dataset(const ExperimentConfig& cfg) {
  if (!cfg.sampling) throw Error(Errc::config, "sampling section required");
  const auto& s = *cfg.sampling;
  const Potential pot = cfg.make_potential();
  const Trajectory traj = simulate(pot, Thermo(cfg.beta), s.x0.value_or(pot.default_start()), s.dt, s.n_steps, s.seed);
  return subsample(traj, s.stride, SubsampleOrigin::skip_initial);
}

json run(const ExperimentConfig& cfg, const fs::path& out, bool quiet) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(Errc::io, fmt::format("cannot create {}: {}", out.string(), ec.message()));
  write_json(out / "config.json", cfg.source);
  RunLog log(out / "run.log", quiet);
  log("task {} -> {}", task_name(cfg.task), out.string());

  json summary{{"task", task_name(cfg.task)}, {"potential", cfg.potential}, {"beta", cfg.beta}};
  switch (cfg.task) {
    case Task::train_ae:
    case Task::train_tlae:
    case Task::train_eigen_transfer:
    case Task::train_eigen_generator: {
      log("simulating {} steps", cfg.sampling->n_steps);
      const Dataset data = make_dataset(cfg);
      write_dataset(out / "dataset.csv", data,
                    {cfg.sampling->dt, cfg.sampling->stride, cfg.sampling->seed, cfg.potential, cfg.epsilon, cfg.beta});
      summary["points"] = data.size();
      summary.update(run_training(cfg, data, out, log));
      break;
    }
    case Task::oracle_report:
      summary.update(run_oracle(cfg, out, log));
      break;
    case Task::mep:
      summary.update(run_mep(cfg, out, log));
      break;
    case Task::evaluate:
      summary.update(run_evaluate(cfg, out, log));
      break;
  }
  write_json(out / "summary.json", summary);
  log("done");
  return summary;
}

}  // namespace slowcv

#pragma once

#include "slowcv/config.hpp"
#include "slowcv/grid.hpp"
#include "slowcv/net.hpp"
#include "slowcv/sampler.hpp"

#include <json.hpp>

#include <filesystem>
#include <span>
#include <vector>

namespace slowcv {

struct EigenEstimate {
  double variance = 0.0;
  double energy = 0.0;  // E_tau(f) = E|f(y) - f(x)|^2 / 2, or (1/beta) E|grad f|^2
  double nu = 0.0;      // transfer only (NaN for the generator form)
  double lambda = 0.0;
};

// Transfer form: nu = 1 - E_tau(f) / Var(f), lambda = (1 - nu) / tau, with
// Var over `points` and E_tau over `pairs`. Throws Errc::degenerate_variance
// when Var < 10 var_guard.
std::vector<EigenEstimate> eigenvalue_estimate_transfer(std::span<const MlpModel> models,
                                                        std::span<const Point2> points,
                                                        std::span<const StatePair> pairs, double tau,
                                                        double var_guard = 1e-6);
// Generator form: lambda = (1/beta) E|grad f|^2 / Var(f).
std::vector<EigenEstimate> eigenvalue_estimate_generator(std::span<const MlpModel> models,
                                                         std::span<const Point2> points, double beta,
                                                         double var_guard = 1e-6);

// Regular n1 x n2 node table (x1 fastest) with header x1,x2,v (one output)
// or x1,x2,v1..vK (several outputs, or several models).
void export_grid(const std::filesystem::path& csv_path, std::span<const MlpModel> models, const Domain& domain,
                 int n1, int n2);
void export_grid(const std::filesystem::path& csv_path, const oracle::Grid2D& grid, const oracle::GridFunction& f,
                 const Domain& domain, int n1, int n2);

// Decoder image of 256 equally spaced latent values between the 1st and 99th
// percentile of enc(points); header z,y1,y2.
void export_decoder_curve(const std::filesystem::path& csv_path, const MlpModel& enc, const MlpModel& dec,
                          std::span<const Point2> points);

// Trajectory -> recorded dataset used by every pipeline (initial state not
// recorded, so n_steps / stride points).
Dataset make_dataset(const ExperimentConfig& cfg);

// Runs one experiment and writes its artifacts into `out` (created when
// missing). Returns the summary document also written to summary.json.
nlohmann::json run(const ExperimentConfig& cfg, const std::filesystem::path& out, bool quiet = false);

}  // namespace slowcv

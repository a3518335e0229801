#include "slowcv/sampler.hpp"

#include "slowcv/csv.hpp"
#include "slowcv/error.hpp"
#include "slowcv/rng.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>

namespace slowcv {

namespace {
constexpr double kDivergenceBound = 1e6;
}

Trajectory simulate(const Potential& potential, const Thermo& thermo, const Point2& x0, double dt,
                    long n_steps, std::uint64_t seed) {
  if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "simulate: dt must be positive");
  if (n_steps < 1) throw Error(Errc::invalid_argument, "simulate: n_steps must be >= 1");

  Trajectory traj;
  traj.dt = dt;
  traj.potential = potential.name();
  traj.beta = thermo.beta;
  traj.seed = seed;
  traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.states.push_back(x0);

  Rng rng(seed);
  const double noise = std::sqrt(2.0 * dt / thermo.beta);
  Point2 x = x0;
  for (long n = 0; n < n_steps; ++n) {
    const auto [g1, g2] = rng.gaussian_pair();
    x = x - potential.gradient(x) * dt + noise * Point2(g1, g2);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergenceBound) {
      throw Error(Errc::diverged, fmt::format("simulate: trajectory diverged at step {} (dt={} too large?)",
                                              n + 1, dt));
    }
    traj.states.push_back(x);
  }
  return traj;
}

Dataset subsample(const Trajectory& trajectory, int stride, SubsampleOrigin origin) {
  if (stride < 1) throw Error(Errc::invalid_argument, "subsample: stride must be >= 1");
  Dataset d;
  d.stride = stride;
  d.dt = trajectory.dt;
  const std::size_t first = origin == SubsampleOrigin::include_initial ? 0 : static_cast<std::size_t>(stride);
  for (std::size_t i = first; i < trajectory.states.size(); i += static_cast<std::size_t>(stride)) {
    d.points.push_back(trajectory.states[i]);
  }
  return d;
}

PairDataset lagged_pairs(const Dataset& data, int lag) {
  if (lag < 0) throw Error(Errc::invalid_argument, "lagged_pairs: negative lag");
  if (static_cast<std::size_t>(lag) >= data.size()) {
    throw Error(Errc::lag_too_large,
                fmt::format("lagged_pairs: lag {} >= dataset size {}", lag, data.size()));
  }
  PairDataset out;
  out.lag = lag;
  out.tau = lag * data.effective_dt();
  const std::size_t n = data.size() - static_cast<std::size_t>(lag);
  out.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.pairs.push_back({data.points[i], data.points[i + lag]});
  return out;
}

int lag_steps(double tau, double effective_dt) {
  if (tau < 0.0 || !(effective_dt > 0.0)) throw Error(Errc::invalid_argument, "lag_steps: invalid tau or step");
  const double ratio = tau / effective_dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(Errc::invalid_argument,
                fmt::format("lag time {} is not a multiple of the recording step {}", tau, effective_dt));
  }
  return static_cast<int>(rounded);
}

void write_dataset(const std::filesystem::path& csv_path, const Dataset& data, const DatasetMeta& meta) {
  CsvWriter csv(csv_path, {"x1", "x2"});
  for (const auto& p : data.points) csv.row({p[0], p[1]});

  nlohmann::json side = {{"dt", meta.dt},           {"stride", meta.stride}, {"seed", meta.seed},
                         {"potential", meta.potential}, {"epsilon", meta.epsilon}, {"beta", meta.beta},
                         {"count", data.size()}};
  auto json_path = csv_path;
  json_path.replace_extension(".json");
  write_json(json_path, side);
}

Dataset read_dataset(const std::filesystem::path& csv_path, DatasetMeta* meta) {
  const auto rows = read_csv(csv_path, {"x1", "x2"});
  Dataset d;
  d.points.reserve(rows.size());
  for (const auto& r : rows) d.points.emplace_back(r[0], r[1]);

  auto json_path = csv_path;
  json_path.replace_extension(".json");
  const auto side = read_json(json_path);
  try {
    d.dt = side.at("dt").get<double>();
    d.stride = side.at("stride").get<int>();
    if (meta) {
      meta->dt = d.dt;
      meta->stride = d.stride;
      meta->seed = side.at("seed").get<std::uint64_t>();
      meta->potential = side.at("potential").get<std::string>();
      meta->epsilon = side.value("epsilon", 0.0);
      meta->beta = side.at("beta").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, fmt::format("{}: malformed dataset sidecar: {}", json_path.string(), e.what()));
  }
  return d;
}

}  // namespace slowcv

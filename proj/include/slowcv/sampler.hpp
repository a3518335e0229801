#pragma once

#include "slowcv/potentials.hpp"
#include "slowcv/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace slowcv {

struct Trajectory {
  std::vector<Point2> states;  // n_steps + 1 states, states[0] = x0
  double dt = 0.0;
  std::string potential;
  double beta = 0.0;
  std::uint64_t seed = 0;
};

struct Dataset {
  std::vector<Point2> points;
  int stride = 1;
  double dt = 0.0;  // integrator step of the source trajectory

  double effective_dt() const { return stride * dt; }
  std::size_t size() const { return points.size(); }
};

struct StatePair {
  Point2 x;
  Point2 y;
};

// Ordered pairs (points[i], points[i + lag]).
struct PairDataset {
  std::vector<StatePair> pairs;
  int lag = 0;
  double tau = 0.0;

  std::size_t size() const { return pairs.size(); }
};

// Euler-Maruyama for dX = -grad V dt + sqrt(2 / beta) dW:
//   X_{n+1} = X_n - grad V(X_n) dt + sqrt(2 dt / beta) (G1, G2)
// with (G1, G2) one Box-Muller pair per step. Throws Errc::diverged once any
// coordinate is non-finite or exceeds 1e6 in magnitude.
Trajectory simulate(const Potential& potential, const Thermo& thermo, const Point2& x0, double dt,
                    long n_steps, std::uint64_t seed);

enum class SubsampleOrigin {
  include_initial,  // states 0, s, 2s, ...
  skip_initial,     // states s, 2s, ..., so n_steps / s points are recorded
};

Dataset subsample(const Trajectory& trajectory, int stride,
                  SubsampleOrigin origin = SubsampleOrigin::include_initial);

PairDataset lagged_pairs(const Dataset& data, int lag);

// Lag in recorded steps for a lag time tau; throws when tau is not a
// whole multiple of the dataset's effective step.
int lag_steps(double tau, double effective_dt);

struct DatasetMeta {
  double dt = 0.0;
  int stride = 1;
  std::uint64_t seed = 0;
  std::string potential;
  double epsilon = 0.0;
  double beta = 0.0;
};

// CSV with header "x1,x2" plus a JSON sidecar (same stem, .json).
void write_dataset(const std::filesystem::path& csv_path, const Dataset& data, const DatasetMeta& meta);
Dataset read_dataset(const std::filesystem::path& csv_path, DatasetMeta* meta = nullptr);

}  // namespace slowcv

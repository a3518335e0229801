#pragma once

#include "slowcv/mep.hpp"
#include "slowcv/potentials.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace slowcv {

enum class Task {
  train_ae,
  train_tlae,
  train_eigen_transfer,
  train_eigen_generator,
  oracle_report,
  mep,
  evaluate,
};

const char* task_name(Task task);

struct SamplingConfig {
  double dt = 0.005;
  long n_steps = 100000;
  int stride = 2;
  std::uint64_t seed = 2046;
  std::optional<Point2> x0;  // potential's default start when absent
};

struct ArchitectureConfig {
  std::vector<int> encoder{2, 30, 30, 30, 30, 1};
  std::vector<int> decoder{1, 30, 30, 30, 2};
  std::vector<int> eigen{2, 20, 20, 20, 1};
};

struct TrainingConfig {
  double lr = 0.005;
  long batch_size = 20000;
  int epochs = 500;
  std::uint64_t seed = 2046;
  double alpha = 10.0;
  std::vector<double> omegas{1.0};
  std::optional<double> tau;  // lag time; exclusive with lag
  std::optional<int> lag;     // lag in recorded steps
  int k = 1;
  double var_guard = 1e-6;
};

struct OracleConfig {
  std::array<int, 2> resolution{161, 161};
  int eigenpairs = 3;
  std::array<int, 2> bins{30, 30};  // Ulam bins; used when sampling is present
  double tau = 1.0;                 // Ulam lag time
};

struct ExportConfig {
  std::array<int, 2> resolution{101, 101};
};

struct ExperimentConfig {
  Task task = Task::train_ae;
  std::string potential = "example1";
  double epsilon = 0.5;
  double beta = 4.0;
  std::optional<SamplingConfig> sampling;
  ArchitectureConfig architecture;
  TrainingConfig training;
  OracleConfig oracle;
  StringConfig mep;
  Point2 mep_a{-1.0, 0.0};
  Point2 mep_b{1.0, 0.0};
  std::optional<std::filesystem::path> model_dir;  // evaluate
  ExportConfig exports;
  std::optional<std::filesystem::path> output;

  nlohmann::json source;  // the document as given, echoed into every run directory

  Potential make_potential() const { return Potential::from_name(potential, epsilon); }
  // Lag in recorded steps for the lagged tasks (train_tlae, train_eigen_transfer).
  int lag_steps() const;
};

// Parses and validates a config document. Unknown keys, wrong types and
// out-of-range values throw Errc::config before anything is computed.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// Built-in settings for `reproduce <name>`.
std::vector<std::string> reproduce_names();
nlohmann::json reproduce_config(const std::string& name);

}  // namespace slowcv

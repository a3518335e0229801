// Command-line front end: slowcv <verb> [options]
//
//   simulate  --config c.json --out dir   trajectory -> dataset.csv
//   train     --config c.json --out dir   train_* tasks
//   oracle    --config c.json --out dir   grid spectrum and Ulam report
//   mep       --config c.json --out dir   string method path
//   evaluate  --config c.json --out dir   re-evaluate a trained run
//   reproduce <name> --out dir            bundled settings (see --help)
//
// Exit status: 0 ok, 2 configuration error, 3 numerical failure, 1 other.

#include "slowcv/config.hpp"
#include "slowcv/csv.hpp"
#include "slowcv/error.hpp"
#include "slowcv/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <string>

namespace {

using slowcv::Errc;
using slowcv::Error;
using slowcv::Task;

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::filesystem::path output_dir(const slowcv::ExperimentConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (cfg.output) return *cfg.output;
  throw Error(Errc::config, "no output directory: pass --out or set 'output' in the config");
}

void require_task(const slowcv::ExperimentConfig& cfg, std::initializer_list<Task> allowed, const char* verb) {
  for (Task t : allowed) {
    if (cfg.task == t) return;
  }
  throw Error(Errc::config, fmt::format("'{}' cannot run task '{}'", verb, slowcv::task_name(cfg.task)));
}

void simulate(const slowcv::ExperimentConfig& cfg, const std::filesystem::path& out, bool quiet) {
  std::filesystem::create_directories(out);
  slowcv::write_json(out / "config.json", cfg.source);
  const slowcv::Dataset data = slowcv::make_dataset(cfg);
  const auto& s = *cfg.sampling;
  slowcv::write_dataset(out / "dataset.csv", data, {s.dt, s.stride, s.seed, cfg.potential, cfg.epsilon, cfg.beta});
  if (!quiet) fmt::print(stderr, "wrote {} points to {}\n", data.size(), (out / "dataset.csv").string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective variables from slow modes: sampling, training and reference computations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  bool quiet = false;
  std::string target;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out, "artifact directory (overrides 'output')");
    sub->add_flag("--quiet", quiet, "no progress output");
  };
  auto* sim = app.add_subcommand("simulate", "sample a trajectory and write the dataset");
  auto* train = app.add_subcommand("train", "run a training task");
  auto* oracle = app.add_subcommand("oracle", "grid spectrum, resolution check and Ulam estimate");
  auto* mep = app.add_subcommand("mep", "minimal energy path by the string method");
  auto* evaluate = app.add_subcommand("evaluate", "re-evaluate a trained run on fresh data");
  auto* reproduce = app.add_subcommand("reproduce", "run a bundled experiment");
  for (auto* sub : {sim, train, oracle, mep, evaluate}) add_common(sub, true);
  add_common(reproduce, false);
  std::string names;
  for (const auto& n : slowcv::reproduce_names()) names += (names.empty() ? "" : "|") + n;
  reproduce->add_option("name", target, names)->required()->check(CLI::IsMember(slowcv::reproduce_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (reproduce->parsed()) {
      const auto cfg = slowcv::parse_config(slowcv::reproduce_config(target));
      slowcv::run(cfg, out.empty() ? std::filesystem::path("runs") / target : std::filesystem::path(out), quiet);
      return 0;
    }
    const auto cfg = slowcv::load_config(config_path);
    if (sim->parsed()) {
      if (!cfg.sampling) throw Error(Errc::config, "simulate needs a 'sampling' section");
      simulate(cfg, output_dir(cfg, out), quiet);
      return 0;
    }
    if (train->parsed()) {
      require_task(cfg, {Task::train_ae, Task::train_tlae, Task::train_eigen_transfer, Task::train_eigen_generator},
                   "train");
    } else if (oracle->parsed()) {
      require_task(cfg, {Task::oracle_report}, "oracle");
    } else if (mep->parsed()) {
      require_task(cfg, {Task::mep}, "mep");
    } else if (evaluate->parsed()) {
      require_task(cfg, {Task::evaluate}, "evaluate");
    }
    slowcv::run(cfg, output_dir(cfg, out), quiet);
    return 0;
  } catch (const Error& e) {
    fmt::print(stderr, "error [{}]: {}\n", slowcv::errc_name(e.code()), e.what());
    if (e.code() == Errc::config) return kExitConfig;
    return slowcv::is_numerical(e.code()) ? kExitNumerical : kExitOther;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitOther;
  }
}

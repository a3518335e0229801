#include "slowcv/config.hpp"

#include "slowcv/csv.hpp"
#include "slowcv/error.hpp"
#include "slowcv/sampler.hpp"

#include <fmt/format.h>

#include <cmath>
#include <initializer_list>
#include <set>

namespace slowcv {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw Error(Errc::config, where.empty() ? msg : where + ": " + msg);
}

// Checked access into one JSON object.
class Section {
 public:
  Section(const json& j, std::string where, std::initializer_list<const char*> allowed)
      : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j_.items()) {
      if (!ok.contains(key)) fail(where_, fmt::format("unknown key '{}'", key));
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }
  const json& raw(const char* key) const { return j_.at(key); }

  double number(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_number()) fail(path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path(key), "must be finite");
    return d;
  }
  double positive(const char* key) const {
    const double d = number(key);
    if (!(d > 0.0)) fail(path(key), "must be > 0");
    return d;
  }
  long integer(const char* key, long min) const {
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(path(key), "expected an integer");
    const long i = v.get<long>();
    if (i < min) fail(path(key), fmt::format("must be >= {}", min));
    return i;
  }
  std::uint64_t seed(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail(path(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::string string(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_array()) fail(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(path(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<int> integers(const char* key, int min) const {
    const json& v = j_.at(key);
    if (!v.is_array()) fail(path(key), "expected an array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long>() < min) fail(path(key), fmt::format("expected integers >= {}", min));
      out.push_back(e.get<int>());
    }
    return out;
  }
  bool boolean(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    return v.get<bool>();
  }
  Point2 point(const char* key) const {
    const auto v = numbers(key);
    if (v.size() != 2) fail(path(key), "expected [x1, x2]");
    return {v[0], v[1]};
  }
  std::array<int, 2> pair(const char* key, int min) const {
    const auto v = integers(key, min);
    if (v.size() != 2) fail(path(key), "expected two integers");
    return {v[0], v[1]};
  }

 private:
  const json& j_;
  std::string where_;
};

Task parse_task(const std::string& s) {
  for (Task t : {Task::train_ae, Task::train_tlae, Task::train_eigen_transfer, Task::train_eigen_generator,
                 Task::oracle_report, Task::mep, Task::evaluate}) {
    if (s == task_name(t)) return t;
  }
  fail("task", fmt::format("unknown task '{}'", s));
}

void check_architecture(const std::vector<int>& sizes, int in, int out, const std::string& where) {
  if (sizes.size() < 2) fail(where, "needs at least input and output sizes");
  if (sizes.front() != in || sizes.back() != out) {
    fail(where, fmt::format("must map R^{} -> R^{}", in, out));
  }
}

bool needs_sampling(Task t) { return t != Task::mep && t != Task::oracle_report; }
bool is_training(Task t) {
  return t == Task::train_ae || t == Task::train_tlae || t == Task::train_eigen_transfer ||
         t == Task::train_eigen_generator;
}
bool is_lagged(Task t) { return t == Task::train_tlae || t == Task::train_eigen_transfer; }

}  // namespace

const char* task_name(Task task) {
  switch (task) {
    case Task::train_ae: return "train_ae";
    case Task::train_tlae: return "train_tlae";
    case Task::train_eigen_transfer: return "train_eigen_transfer";
    case Task::train_eigen_generator: return "train_eigen_generator";
    case Task::oracle_report: return "oracle_report";
    case Task::mep: return "mep";
    case Task::evaluate: return "evaluate";
  }
  return "";
}

int ExperimentConfig::lag_steps() const {
  if (training.lag) return *training.lag;
  if (!training.tau || !sampling) throw Error(Errc::config, "training: lagged task needs tau or lag");
  if (*training.tau == 0.0) return 0;
  return slowcv::lag_steps(*training.tau, sampling->dt * sampling->stride);
}

ExperimentConfig parse_config(const json& doc) {
  const Section top(doc, "", {"task", "potential", "beta", "sampling", "architecture", "training", "oracle", "mep",
                              "evaluate", "export", "output"});
  ExperimentConfig cfg;
  cfg.source = doc;

  if (!top.has("task")) fail("", "missing 'task'");
  cfg.task = parse_task(top.string("task"));

  if (!top.has("potential")) fail("", "missing 'potential'");
  {
    const Section p(top.raw("potential"), "potential", {"name", "epsilon"});
    if (!p.has("name")) fail("potential", "missing 'name'");
    cfg.potential = p.string("name");
    if (p.has("epsilon")) cfg.epsilon = p.positive("epsilon");
    try {
      (void)cfg.make_potential();
    } catch (const Error& e) {
      fail("potential", e.what());
    }
  }
  if (cfg.task != Task::mep) {
    if (!top.has("beta")) fail("", "missing 'beta'");
    cfg.beta = top.positive("beta");
  } else if (top.has("beta")) {
    cfg.beta = top.positive("beta");
  }

  if (top.has("sampling")) {
    const Section s(top.raw("sampling"), "sampling", {"dt", "n_steps", "stride", "seed", "x0"});
    SamplingConfig sc;
    for (const char* key : {"dt", "n_steps", "stride", "seed"}) {
      if (!s.has(key)) fail("sampling", fmt::format("missing '{}'", key));
    }
    sc.dt = s.positive("dt");
    sc.n_steps = s.integer("n_steps", 1);
    sc.stride = static_cast<int>(s.integer("stride", 1));
    sc.seed = s.seed("seed");
    if (s.has("x0")) sc.x0 = s.point("x0");
    if (sc.n_steps / sc.stride < 2) fail("sampling", "fewer than two recorded states");
    cfg.sampling = sc;
  } else if (needs_sampling(cfg.task)) {
    fail("", fmt::format("task '{}' needs a 'sampling' section", task_name(cfg.task)));
  }

  if (top.has("architecture")) {
    const Section a(top.raw("architecture"), "architecture", {"encoder", "decoder", "eigen"});
    if (a.has("encoder")) cfg.architecture.encoder = a.integers("encoder", 1);
    if (a.has("decoder")) cfg.architecture.decoder = a.integers("decoder", 1);
    if (a.has("eigen")) cfg.architecture.eigen = a.integers("eigen", 1);
  }
  check_architecture(cfg.architecture.eigen, 2, 1, "architecture.eigen");
  check_architecture(cfg.architecture.encoder, 2, cfg.architecture.encoder.back(), "architecture.encoder");
  check_architecture(cfg.architecture.decoder, cfg.architecture.encoder.back(), 2, "architecture.decoder");

  if (top.has("training")) {
    const Section t(top.raw("training"), "training",
                    {"lr", "batch_size", "epochs", "seed", "alpha", "omegas", "tau", "lag", "k", "var_guard"});
    auto& tc = cfg.training;
    if (t.has("lr")) tc.lr = t.positive("lr");
    if (t.has("batch_size")) tc.batch_size = t.integer("batch_size", 1);
    if (t.has("epochs")) tc.epochs = static_cast<int>(t.integer("epochs", 1));
    if (t.has("seed")) tc.seed = t.seed("seed");
    if (t.has("alpha")) {
      tc.alpha = t.number("alpha");
      if (tc.alpha < 0.0) fail("training.alpha", "must be >= 0");
    }
    if (t.has("k")) tc.k = static_cast<int>(t.integer("k", 1));
    if (t.has("omegas")) tc.omegas = t.numbers("omegas");
    if (t.has("var_guard")) tc.var_guard = t.positive("var_guard");
    if (t.has("tau") && t.has("lag")) fail("training", "give either 'tau' or 'lag', not both");
    if (t.has("tau")) {
      tc.tau = t.number("tau");
      if (*tc.tau < 0.0) fail("training.tau", "must be >= 0");
    }
    if (t.has("lag")) tc.lag = static_cast<int>(t.integer("lag", 0));
  } else if (is_training(cfg.task)) {
    fail("", fmt::format("task '{}' needs a 'training' section", task_name(cfg.task)));
  }
  {
    const auto& tc = cfg.training;
    if (static_cast<int>(tc.omegas.size()) != tc.k) fail("training.omegas", "needs exactly k entries");
    for (std::size_t i = 0; i < tc.omegas.size(); ++i) {
      if (!(tc.omegas[i] > 0.0)) fail("training.omegas", "entries must be > 0");
      if (i > 0 && tc.omegas[i] > tc.omegas[i - 1]) fail("training.omegas", "entries must be non-increasing");
    }
  }
  if (is_lagged(cfg.task)) {
    if (!cfg.training.tau && !cfg.training.lag) fail("training", "lagged task needs 'tau' or 'lag'");
    if (cfg.task == Task::train_eigen_transfer && cfg.lag_steps() == 0) fail("training", "transfer loss needs a positive lag");
    try {
      (void)cfg.lag_steps();
    } catch (const Error& e) {
      fail("training.tau", e.what());
    }
  }

  if (top.has("oracle")) {
    const Section o(top.raw("oracle"), "oracle", {"resolution", "eigenpairs", "bins", "tau"});
    if (o.has("resolution")) cfg.oracle.resolution = o.pair("resolution", 3);
    if (o.has("eigenpairs")) {
      cfg.oracle.eigenpairs = static_cast<int>(o.integer("eigenpairs", 2));
      if (cfg.oracle.eigenpairs > 12) fail("oracle.eigenpairs", "must be <= 12");
    }
    if (o.has("bins")) cfg.oracle.bins = o.pair("bins", 1);
    if (o.has("tau")) cfg.oracle.tau = o.positive("tau");
  }
  if (cfg.task == Task::oracle_report && cfg.sampling) {
    try {
      (void)slowcv::lag_steps(cfg.oracle.tau, cfg.sampling->dt * cfg.sampling->stride);
    } catch (const Error& e) {
      fail("oracle.tau", e.what());
    }
  }

  if (top.has("mep")) {
    const Section m(top.raw("mep"), "mep", {"a", "b", "nodes", "step", "tol", "max_iters", "require_minima"});
    if (m.has("a")) cfg.mep_a = m.point("a");
    if (m.has("b")) cfg.mep_b = m.point("b");
    if (m.has("nodes")) cfg.mep.nodes = static_cast<int>(m.integer("nodes", 10));
    if (m.has("step")) cfg.mep.step = m.positive("step");
    if (m.has("tol")) cfg.mep.tol = m.positive("tol");
    if (m.has("max_iters")) cfg.mep.max_iters = m.integer("max_iters", 1);
    if (m.has("require_minima")) cfg.mep.require_minima = m.boolean("require_minima");
  }

  if (top.has("evaluate")) {
    const Section e(top.raw("evaluate"), "evaluate", {"model_dir"});
    if (e.has("model_dir")) cfg.model_dir = e.string("model_dir");
  }
  if (cfg.task == Task::evaluate && !cfg.model_dir) fail("evaluate", "missing 'model_dir'");

  if (top.has("export")) {
    const Section x(top.raw("export"), "export", {"resolution"});
    if (x.has("resolution")) cfg.exports.resolution = x.pair("resolution", 2);
  }
  if (top.has("output")) cfg.output = top.string("output");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = read_json(path);
  } catch (const json::exception& e) {
    throw Error(Errc::config, fmt::format("{}: {}", path.string(), e.what()));
  } catch (const Error& e) {
    throw Error(Errc::config, e.what());
  }
  return parse_config(doc);
}

std::vector<std::string> reproduce_names() {
  return {"example1-ae",        "example1-tlae-0.5", "example1-tlae-1.0", "example1-tlae-2.0",
          "example1-eigen",     "example2-ae",       "example2-eigen"};
}

json reproduce_config(const std::string& name) {
  const json ex1_sampling = {{"dt", 0.005}, {"n_steps", 100000}, {"stride", 2}, {"seed", 2046}, {"x0", {1.0, 0.0}}};
  const json ex2_sampling = {{"dt", 0.005}, {"n_steps", 500000}, {"stride", 2}, {"seed", 2046}, {"x0", {2.0, 0.0}}};
  const json ae_arch = {{"encoder", {2, 30, 30, 30, 30, 1}}, {"decoder", {1, 30, 30, 30, 2}}};
  const json eigen_arch = {{"eigen", {2, 20, 20, 20, 1}}};
  const json ex1_potential = {{"name", "example1"}, {"epsilon", 0.5}};
  const json ex2_potential = {{"name", "example2"}};
  const json ex1_training = {{"lr", 0.005}, {"batch_size", 20000}, {"epochs", 500}, {"seed", 2046}};
  const json ex2_training = {{"lr", 0.005}, {"batch_size", 100000}, {"epochs", 1000}, {"seed", 2046}};

  auto with = [](json base, std::initializer_list<std::pair<const char*, json>> extra) {
    for (const auto& [k, v] : extra) base[k] = v;
    return base;
  };

  if (name == "example1-ae") {
    return {{"task", "train_ae"}, {"potential", ex1_potential}, {"beta", 4.0}, {"sampling", ex1_sampling},
            {"architecture", ae_arch}, {"training", ex1_training}};
  }
  for (const char* tau : {"0.5", "1.0", "2.0"}) {
    if (name == std::string("example1-tlae-") + tau) {
      return {{"task", "train_tlae"}, {"potential", ex1_potential}, {"beta", 4.0}, {"sampling", ex1_sampling},
              {"architecture", ae_arch}, {"training", with(ex1_training, {{"tau", std::stod(tau)}})}};
    }
  }
  if (name == "example1-eigen") {
    return {{"task", "train_eigen_transfer"},
            {"potential", ex1_potential},
            {"beta", 4.0},
            {"sampling", ex1_sampling},
            {"architecture", eigen_arch},
            {"training", with(ex1_training, {{"tau", 1.0}, {"alpha", 10.0}, {"k", 1}, {"omegas", {1.0}}})}};
  }
  if (name == "example2-ae") {
    return {{"task", "train_ae"}, {"potential", ex2_potential}, {"beta", 1.5}, {"sampling", ex2_sampling},
            {"architecture", ae_arch}, {"training", ex2_training}};
  }
  if (name == "example2-eigen") {
    return {{"task", "train_eigen_transfer"},
            {"potential", ex2_potential},
            {"beta", 1.5},
            {"sampling", ex2_sampling},
            {"architecture", eigen_arch},
            {"training", with(ex2_training, {{"tau", 0.5}, {"alpha", 10.0}, {"k", 1}, {"omegas", {1.0}}})}};
  }
  throw Error(Errc::config, fmt::format("unknown reproduce target '{}'", name));
}

}  // namespace slowcv

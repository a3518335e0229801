#include "slowcv/mep.hpp"

#include "slowcv/csv.hpp"
#include "slowcv/error.hpp"

#include <algorithm>
#include <cmath>

namespace slowcv {

void StringConfig::validate() const {
  if (nodes < 10) throw Error(Errc::invalid_argument, "string method needs at least 10 nodes");
  if (!(step > 0.0) || !(tol > 0.0)) throw Error(Errc::invalid_argument, "string method step and tol must be positive");
  if (max_iters < 1) throw Error(Errc::invalid_argument, "string method max_iters must be >= 1");
}

std::vector<Point2> reparameterize(const std::vector<Point2>& nodes) {
  const std::size_t m = nodes.size();
  std::vector<double> s(m, 0.0);
  for (std::size_t i = 1; i < m; ++i) s[i] = s[i - 1] + (nodes[i] - nodes[i - 1]).norm();
  const double total = s.back();
  std::vector<Point2> out(m);
  out.front() = nodes.front();
  out.back() = nodes.back();
  if (!(total > 0.0)) return nodes;
  std::size_t seg = 1;
  for (std::size_t k = 1; k + 1 < m; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(m - 1);
    while (seg + 1 < m && s[seg] < target) ++seg;
    const double len = s[seg] - s[seg - 1];
    const double t = len > 0.0 ? (target - s[seg - 1]) / len : 0.0;
    out[k] = nodes[seg - 1] + t * (nodes[seg] - nodes[seg - 1]);
  }
  return out;
}

Path string_method(const Potential& potential, const Point2& a, const Point2& b, const StringConfig& cfg) {
  cfg.validate();
  if (cfg.require_minima && (potential.gradient(a).norm() >= 0.1 || potential.gradient(b).norm() >= 0.1)) {
    throw Error(Errc::invalid_argument, "string method endpoints must lie near local minima (|grad V| < 0.1)");
  }
  const auto m = static_cast<std::size_t>(cfg.nodes);
  Path path;
  path.nodes.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(m - 1);
    path.nodes[k] = (1.0 - t) * a + t * b;
  }
  path.nodes.back() = b;

  std::vector<Point2> moved(m);
  for (long it = 1; it <= cfg.max_iters; ++it) {
    moved = path.nodes;
    for (std::size_t k = 1; k + 1 < m; ++k) moved[k] -= cfg.step * potential.gradient(moved[k]);
    moved = reparameterize(moved);

    double shift = 0.0;
    double vmax = -INFINITY;
    for (std::size_t k = 0; k < m; ++k) {
      shift = std::max(shift, (moved[k] - path.nodes[k]).norm());
      vmax = std::max(vmax, potential.value(moved[k]));
    }
    if (!std::isfinite(vmax)) throw Error(Errc::diverged, "string method diverged; reduce the step");
    path.nodes.swap(moved);
    path.iterations = it;
    path.max_energy.push_back(vmax);
    if (shift < cfg.tol) {
      path.converged = true;
      break;
    }
  }
  return path;
}

void write_path(const std::filesystem::path& csv_path, const Path& path) {
  CsvWriter csv(csv_path, {"x1", "x2"});
  for (const auto& p : path.nodes) csv.row({p[0], p[1]});
}

}  // namespace slowcv

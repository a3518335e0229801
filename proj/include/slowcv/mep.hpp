#pragma once

#include "slowcv/potentials.hpp"

#include <filesystem>
#include <vector>

namespace slowcv {

struct StringConfig {
  int nodes = 50;
  double step = 1e-3;
  double tol = 1e-6;
  long max_iters = 50000;
  bool require_minima = true;  // reject endpoints with |grad V| >= 0.1

  void validate() const;
};

struct Path {
  std::vector<Point2> nodes;
  bool converged = false;
  long iterations = 0;
  std::vector<double> max_energy;  // max_k V(node_k) after each iteration
};

// Simplified string method: every interior node takes a gradient-descent
// step, then all nodes are redistributed at equal arclength along the
// piecewise-linear string. Endpoints stay at a and b. Stops once no node
// moves by more than tol in one iteration; otherwise returns the last string
// with converged = false. The initial string is the straight segment a-b.
// With require_minima, throws Errc::invalid_argument unless |grad V| < 0.1
// at both endpoints.
Path string_method(const Potential& potential, const Point2& a, const Point2& b, const StringConfig& cfg = {});

// Equal-arclength redistribution of a polyline (same number of nodes).
std::vector<Point2> reparameterize(const std::vector<Point2>& nodes);

void write_path(const std::filesystem::path& csv_path, const Path& path);

}  // namespace slowcv

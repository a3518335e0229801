#include "slowcv/ulam.hpp"

#include "slowcv/csv.hpp"
#include "slowcv/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace slowcv::oracle {

namespace {

nlohmann::json domain_json(const Domain& d) { return {d.x1_min, d.x1_max, d.x2_min, d.x2_max}; }

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void BinSpec::validate() const {
  if (n1 < 1 || n2 < 1) throw Error(Errc::invalid_argument, "bins: need at least one bin per axis");
  if (!(domain.x1_max > domain.x1_min) || !(domain.x2_max > domain.x2_min)) {
    throw Error(Errc::invalid_argument, "bins: empty domain");
  }
}

int BinSpec::label(const Point2& x) const {
  if (!domain.contains(x)) return overflow();
  const double u = (x[0] - domain.x1_min) / (domain.x1_max - domain.x1_min) * n1;
  const double v = (x[1] - domain.x2_min) / (domain.x2_max - domain.x2_min) * n2;
  const int i1 = std::min(n1 - 1, static_cast<int>(u));
  const int i2 = std::min(n2 - 1, static_cast<int>(v));
  return i2 * n1 + i1;
}

Point2 BinSpec::center(int bin) const {
  if (bin < 0 || bin >= regular_bins()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  const double w1 = (domain.x1_max - domain.x1_min) / n1;
  const double w2 = (domain.x2_max - domain.x2_min) / n2;
  return {domain.x1_min + (bin % n1 + 0.5) * w1, domain.x2_min + (bin / n1 + 0.5) * w2};
}

int UlamModel::row_of(int bin) const {
  const auto it = std::find(bins.begin(), bins.end(), bin);
  return it == bins.end() ? -1 : static_cast<int>(it - bins.begin());
}

UlamModel ulam_from_labels(std::span<const std::pair<int, int>> transitions, int num_bins, bool symmetrize) {
  if (num_bins < 1) throw Error(Errc::invalid_argument, "ulam: need at least one bin");
  for (const auto& [a, b] : transitions) {
    if (a < 0 || a >= num_bins || b < 0 || b >= num_bins) throw Error(Errc::invalid_argument, "ulam: label out of range");
  }

  std::vector<char> dead(static_cast<std::size_t>(num_bins), 0);
  std::vector<long> outgoing(static_cast<std::size_t>(num_bins));
  UlamModel model;
  for (;;) {
    std::fill(outgoing.begin(), outgoing.end(), 0);
    for (const auto& [a, b] : transitions) {
      if (!dead[a] && !dead[b]) ++outgoing[a];
    }
    bool changed = false;
    for (const auto& [a, b] : transitions) {
      if (!dead[a] && !dead[b] && outgoing[b] == 0) {
        dead[b] = 1;
        model.dropped_bins.push_back(b);
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::sort(model.dropped_bins.begin(), model.dropped_bins.end());

  std::vector<int> row(static_cast<std::size_t>(num_bins), -1);
  for (int b = 0; b < num_bins; ++b) {
    if (outgoing[b] > 0) {
      row[b] = static_cast<int>(model.bins.size());
      model.bins.push_back(b);
    }
  }
  const auto n = static_cast<Eigen::Index>(model.bins.size());
  if (n == 0) throw Error(Errc::empty_bin_row, "ulam: no bin has an outgoing transition");

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  long kept = 0;
  for (const auto& [a, b] : transitions) {
    if (row[a] < 0 || row[b] < 0) {
      ++model.dropped_pairs;
      continue;
    }
    counts(row[a], row[b]) += 1.0;
    ++kept;
  }
  model.pi = counts.rowwise().sum() / static_cast<double>(kept);
  model.P = counts;
  for (Eigen::Index i = 0; i < n; ++i) model.P.row(i) /= counts.row(i).sum();
  if (symmetrize) symmetrize_flux(model);
  return model;
}

UlamModel ulam_transfer(const PairDataset& pairs, const BinSpec& bins, bool symmetrize) {
  bins.validate();
  std::vector<std::pair<int, int>> labels;
  labels.reserve(pairs.size());
  for (const auto& p : pairs.pairs) labels.emplace_back(bins.label(p.x), bins.label(p.y));
  return ulam_from_labels(labels, bins.total_bins(), symmetrize);
}

void symmetrize_flux(UlamModel& model) {
  const Eigen::MatrixXd flux = model.pi.asDiagonal() * model.P;
  const Eigen::MatrixXd sym = 0.5 * (flux + flux.transpose());
  model.pi = sym.rowwise().sum();
  model.P = sym;
  for (Eigen::Index i = 0; i < sym.rows(); ++i) model.P.row(i) /= model.pi[i];
  model.pi /= model.pi.sum();
  model.symmetrized = true;
}

UlamModel ulam_from_matrix(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi) {
  if (P.rows() != P.cols() || P.rows() != pi.size()) throw Error(Errc::dimension_mismatch, "ulam: P and pi sizes differ");
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    if (std::abs(P.row(i).sum() - 1.0) > 1e-12 || (P.row(i).array() < 0.0).any()) {
      throw Error(Errc::invalid_argument, "ulam: rows of P must be probability vectors");
    }
  }
  UlamModel model;
  model.bins.resize(static_cast<std::size_t>(P.rows()));
  std::iota(model.bins.begin(), model.bins.end(), 0);
  model.P = P;
  model.pi = pi;
  model.symmetrized = true;
  return model;
}

EigenResult transfer_eigs(const UlamModel& model, int m, int sign_row) {
  if (!model.symmetrized) throw Error(Errc::invalid_argument, "transfer_eigs: model must be symmetrised");
  const auto n = static_cast<Eigen::Index>(model.size());
  if (m < 1 || m > n) throw Error(Errc::invalid_argument, "transfer_eigs: m out of range");
  const Eigen::ArrayXd s = model.pi.array().sqrt();
  Eigen::MatrixXd a = s.matrix().asDiagonal() * model.P * s.inverse().matrix().asDiagonal();
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw Error(Errc::convergence_failure, "transfer_eigs: eigensolver failed");

  EigenResult res;
  res.values.resize(m);
  res.vectors.resize(n, m);
  for (int j = 0; j < m; ++j) {
    const Eigen::Index src = n - 1 - j;
    res.values[j] = es.eigenvalues()[src];
    res.vectors.col(j) = es.eigenvectors().col(src).array() / s;
    const double scale = res.vectors.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = std::max(0, sign_row); i < n; ++i) {
      if (std::abs(res.vectors(i, j)) > 1e-12 * scale) {
        if (res.vectors(i, j) < 0.0) res.vectors.col(j) *= -1.0;
        break;
      }
    }
  }
  return res;
}

IdentityCheck lemma1_check(const UlamModel& model, const Eigen::VectorXd& f) {
  if (f.size() != static_cast<Eigen::Index>(model.size())) throw Error(Errc::dimension_mismatch, "lemma1_check: f length");
  IdentityCheck c;
  const auto n = f.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = f[j] - f[i];
      row += model.P(i, j) * d * d;
    }
    c.lhs += model.pi[i] * row;
  }
  c.lhs *= 0.5;
  const Eigen::VectorXd pf = model.P * f;
  for (Eigen::Index i = 0; i < n; ++i) c.rhs += model.pi[i] * (f[i] - pf[i]) * f[i];
  c.error = std::abs(c.lhs - c.rhs);
  return c;
}

void export_eigen(const std::filesystem::path& csv_path, const Grid2D& grid, const EigenResult& result) {
  std::vector<std::string> header{"x1", "x2"};
  for (Eigen::Index j = 0; j < result.vectors.cols(); ++j) header.push_back(fmt::format("phi{}", j));
  {
    CsvWriter csv(csv_path, header);
    std::vector<double> row(header.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Point2 x = grid.node(i);
      row[0] = x[0];
      row[1] = x[1];
      for (Eigen::Index j = 0; j < result.vectors.cols(); ++j) row[2 + j] = result.vectors(static_cast<Eigen::Index>(i), j);
      csv.row(row);
    }
  }
  nlohmann::json meta{{"domain", domain_json(grid.domain())},
                      {"resolution", {grid.n1(), grid.n2()}},
                      {"potential", grid.potential().name()},
                      {"beta", grid.thermo().beta},
                      {"normalization", "w-orthonormal (Boltzmann node weights)"},
                      {"eigenvalues", to_vector(result.values)},
                      {"iterations", result.iterations},
                      {"max_residual", result.max_residual}};
  auto sidecar = csv_path;
  write_json(sidecar.replace_extension(".json"), meta);
}

void export_ulam(const std::filesystem::path& csv_path, const BinSpec& bins, const UlamModel& model,
                 const EigenResult& result) {
  std::vector<std::string> header{"bin", "x1", "x2", "pi"};
  for (Eigen::Index j = 0; j < result.vectors.cols(); ++j) header.push_back(fmt::format("psi{}", j));
  {
    CsvWriter csv(csv_path, header);
    std::vector<double> row(header.size());
    for (std::size_t r = 0; r < model.size(); ++r) {
      const Point2 c = bins.center(model.bins[r]);
      row[0] = model.bins[r];
      row[1] = c[0];
      row[2] = c[1];
      row[3] = model.pi[static_cast<Eigen::Index>(r)];
      for (Eigen::Index j = 0; j < result.vectors.cols(); ++j) row[4 + j] = result.vectors(static_cast<Eigen::Index>(r), j);
      csv.row(row);
    }
  }
  nlohmann::json meta{{"domain", domain_json(bins.domain)},
                      {"resolution", {bins.n1, bins.n2}},
                      {"overflow_bin", bins.overflow()},
                      {"symmetrized", model.symmetrized},
                      {"dropped_pairs", model.dropped_pairs},
                      {"dropped_bins", model.dropped_bins},
                      {"normalization", "pi-orthonormal"},
                      {"eigenvalues", to_vector(result.values)}};
  auto sidecar = csv_path;
  write_json(sidecar.replace_extension(".json"), meta);
}

}  // namespace slowcv::oracle

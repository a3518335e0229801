#pragma once

#include "slowcv/generator.hpp"
#include "slowcv/sampler.hpp"

#include <filesystem>
#include <utility>
#include <vector>

namespace slowcv::oracle {

// Regular n1 x n2 rectangular bins over a domain. Points outside the domain
// go to one extra overflow bin with id n1 * n2.
struct BinSpec {
  Domain domain;
  int n1 = 0;
  int n2 = 0;

  int regular_bins() const { return n1 * n2; }
  int total_bins() const { return n1 * n2 + 1; }
  int overflow() const { return n1 * n2; }
  int label(const Point2& x) const;
  Point2 center(int bin) const;  // overflow bin has no centre (NaN)
  void validate() const;
};

// Estimated transition matrix over the bins that have outgoing transitions.
struct UlamModel {
  std::vector<int> bins;   // original bin id of each row/column
  Eigen::MatrixXd P;       // row-stochastic
  Eigen::VectorXd pi;      // stationary weights, sum to 1
  bool symmetrized = false;
  long dropped_pairs = 0;  // pairs discarded because their target bin had no outgoing pair
  std::vector<int> dropped_bins;

  std::size_t size() const { return bins.size(); }
  // Row index of an original bin id, or -1 when the bin is not in the model.
  int row_of(int bin) const;
};

// From labelled transitions (from, to) over `num_bins` bins. pi is the
// occupancy of the `from` labels. Bins visited only as targets are dropped
// together with the pairs leading into them (repeated until every kept bin
// has an outgoing pair).
UlamModel ulam_from_labels(std::span<const std::pair<int, int>> transitions, int num_bins, bool symmetrize);

UlamModel ulam_transfer(const PairDataset& pairs, const BinSpec& bins, bool symmetrize = true);

// Replaces the flux F_ij = pi_i P_ij by (F_ij + F_ji) / 2, renormalises the
// rows and takes the new row sums as pi.
void symmetrize_flux(UlamModel& model);

// Model built from a given reversible chain (checked: stochastic rows).
UlamModel ulam_from_matrix(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi);

// The m largest eigenpairs of a symmetrised model, pi-orthonormal, in
// descending order. Each vector is signed positive on `sign_bin` (row index),
// falling forward to the next non-zero entry.
EigenResult transfer_eigs(const UlamModel& model, int m, int sign_row = 0);

// lhs = 1/2 sum_ij pi_i P_ij (f_j - f_i)^2, rhs = <(I - P) f, f>_pi,
// error = |lhs - rhs|.
IdentityCheck lemma1_check(const UlamModel& model, const Eigen::VectorXd& f);

// Node table x1,x2,phi_0..phi_{m-1} plus a JSON sidecar with domain,
// resolution and eigenvalues.
void export_eigen(const std::filesystem::path& csv_path, const Grid2D& grid, const EigenResult& result);
// Bin table bin,x1,x2,pi,psi_0.. (centres of kept regular bins) plus sidecar.
void export_ulam(const std::filesystem::path& csv_path, const BinSpec& bins, const UlamModel& model,
                 const EigenResult& result);

}  // namespace slowcv::oracle

#pragma once

#include "slowcv/grid.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <span>
#include <vector>

namespace slowcv::oracle {

// Finite-volume discretisation of -L = -(1/beta) e^{beta V} div(e^{-beta V} grad .)
// with zero-flux boundaries. Stored in symmetric form: -L f = W^{-1} K f with
// W = diag(node weights) and
//   f^T K g = (1/beta) sum_faces w_face (f_i - f_j)(g_i - g_j) / h^2,
// w_face = exp(-beta V(face midpoint)) under the node-weight normalisation.
struct GeneratorMatrix {
  Eigen::SparseMatrix<double> stiffness;  // K
  Eigen::VectorXd mass;                   // W diagonal

  // -L applied to a grid function.
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return (stiffness * f).cwiseQuotient(mass); }
  // Row-scaled matrix W^{-1} K (not symmetric; symmetric under the w-inner product).
  Eigen::SparseMatrix<double> operator_matrix() const;
};

GeneratorMatrix fd_generator(const Grid2D& grid);

// Eigenpairs ordered as the operator's spectrum is ordered: ascending for
// generators, descending for transfer operators. Columns of `vectors` are
// orthonormal in the relevant weighted inner product.
struct EigenResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  int iterations = 0;
  double max_residual = 0.0;
};

// The m smallest eigenpairs of -L (m <= 12), by shift-inverted block subspace
// iteration with Rayleigh-Ritz from a start block drawn with seed 0.
// Eigenfunctions are w-orthonormal; each is signed so that its value at the
// node nearest (1, 0) is positive (scanning forward past zero values).
EigenResult leading_eigs(const GeneratorMatrix& op, const Grid2D& grid, int m);

// (1/beta) sum_faces w_face |grad f|^2, the discrete E_mu|grad f|^2 / beta.
double energy_generator(const GridFunction& f, const Grid2D& grid);

// Smallest nonzero eigenvalue on `grid` and on the grid with half the spacing;
// a relative change above 20% flags the coarse grid.
struct ResolutionReport {
  double lambda1_coarse = 0.0;
  double lambda1_fine = 0.0;
  double relative_change = 0.0;
  bool too_coarse = false;
};
ResolutionReport resolution_check(const Grid2D& grid);

// Closed-form scalar function with exact first and second derivatives.
struct SmoothFunction {
  std::function<double(const Point2&)> value;
  std::function<Point2(const Point2&)> gradient;
  std::function<Matrix2(const Point2&)> hessian;
};

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double error = 0.0;  // absolute or relative, as documented per check
};

// lhs = int |L f|^2 dmu,  rhs = (1/beta) int [HessV(grad f, grad f) + |grad^2 f|_F^2 / beta] dmu,
// both by node quadrature with L f = -grad V . grad f + (1/beta) lap f.
// `error` is |lhs - rhs| / max(|lhs|, |rhs|) (0 when both vanish).
IdentityCheck bochner_check(const Grid2D& grid, const SmoothFunction& f);

struct SlownessTerms {
  double drift = 0.0;      // sum_i w_i int |L xi_i|^2 dmu
  double diffusion = 0.0;  // sum_i w_i int |grad xi_i|^2 dmu
  double total = 0.0;
};

// Centres the family and Gram-Schmidt orthonormalises it in the w-inner
// product, then evaluates both integral terms on the discrete operator.
// Throws Errc::degenerate_family if the family is (numerically) dependent or
// contains a constant.
SlownessTerms slowness_objective(std::span<const GridFunction> xi, const Grid2D& grid, const GeneratorMatrix& op,
                                 std::span<const double> omegas);

// Mean-zero, w-orthonormal copy of the family (same breakdown rule).
std::vector<GridFunction> orthonormalize(std::span<const GridFunction> xi, const Grid2D& grid);

}  // namespace slowcv::oracle

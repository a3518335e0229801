#include "slowcv/generator.hpp"

#include "slowcv/error.hpp"
#include "slowcv/rng.hpp"

#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include <cmath>

namespace slowcv::oracle {

namespace {

constexpr double kShift = 1e-2;
constexpr double kResidualTol = 1e-10;
constexpr int kMaxIterations = 2000;

// Conductance of the face between two nodes, including the 1/(beta h^2).
double face_conductance(const Grid2D& grid, const Point2& a, const Point2& b, double h) {
  return grid.density(0.5 * (a + b)) / (grid.thermo().beta * h * h);
}

// Modified Gram-Schmidt (two passes) in the inner product <x, y> = x^T diag(w) y.
void w_orthonormalize(Eigen::MatrixXd& x, const Eigen::VectorXd& w) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double c = (w.array() * x.col(i).array() * x.col(j).array()).sum();
        x.col(j) -= c * x.col(i);
      }
      const double nrm = std::sqrt((w.array() * x.col(j).array().square()).sum());
      if (!(nrm > 0.0)) throw Error(Errc::convergence_failure, "leading_eigs: subspace collapsed");
      x.col(j) /= nrm;
    }
  }
}

void fix_signs(Eigen::MatrixXd& vecs, const Grid2D& grid) {
  const std::size_t ref = grid.nearest(Point2(1.0, 0.0));
  for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
    const double scale = vecs.col(j).cwiseAbs().maxCoeff();
    for (std::size_t i = ref; i < grid.size(); ++i) {
      const double v = vecs(static_cast<Eigen::Index>(i), j);
      if (std::abs(v) > 1e-12 * scale) {
        if (v < 0.0) vecs.col(j) *= -1.0;
        break;
      }
    }
  }
}

}  // namespace

Eigen::SparseMatrix<double> GeneratorMatrix::operator_matrix() const {
  Eigen::SparseMatrix<double> m = stiffness;
  for (Eigen::Index col = 0; col < m.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it) it.valueRef() /= mass[it.row()];
  }
  return m;
}

GeneratorMatrix fd_generator(const Grid2D& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * 5);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);

  auto add_face = [&](std::size_t i, std::size_t j, double c) {
    triplets.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), -c);
    triplets.emplace_back(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i), -c);
    diag[static_cast<Eigen::Index>(i)] += c;
    diag[static_cast<Eigen::Index>(j)] += c;
  };

  for (int i2 = 0; i2 < grid.n2(); ++i2) {
    for (int i1 = 0; i1 < grid.n1(); ++i1) {
      const std::size_t here = grid.index(i1, i2);
      if (i1 + 1 < grid.n1()) {
        add_face(here, grid.index(i1 + 1, i2),
                 face_conductance(grid, grid.node(i1, i2), grid.node(i1 + 1, i2), grid.h1()));
      }
      if (i2 + 1 < grid.n2()) {
        add_face(here, grid.index(i1, i2 + 1),
                 face_conductance(grid, grid.node(i1, i2), grid.node(i1, i2 + 1), grid.h2()));
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, diag[i]);

  GeneratorMatrix op;
  op.stiffness.resize(n, n);
  op.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  op.mass = grid.weights();
  return op;
}

EigenResult leading_eigs(const GeneratorMatrix& op, const Grid2D& grid, int m) {
  const auto n = op.stiffness.rows();
  if (m < 1 || m > 12) throw Error(Errc::invalid_argument, "leading_eigs: m must be in [1, 12]");
  if (n != static_cast<Eigen::Index>(grid.size())) throw Error(Errc::dimension_mismatch, "leading_eigs: grid/operator mismatch");
  const Eigen::Index block = std::min<Eigen::Index>(n, std::max(2 * m, m + 8));
  const Eigen::VectorXd& w = op.mass;

  Eigen::SparseMatrix<double> shifted = op.stiffness;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += kShift * w[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
  if (solver.info() != Eigen::Success) throw Error(Errc::convergence_failure, "leading_eigs: factorisation failed");

  Rng rng(0);
  Eigen::MatrixXd x(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.uniform(-1.0, 1.0);
  }
  w_orthonormalize(x, w);

  EigenResult res;
  for (int it = 1; it <= kMaxIterations; ++it) {
    Eigen::MatrixXd y = solver.solve(w.asDiagonal() * x);
    w_orthonormalize(y, w);
    Eigen::MatrixXd ky = op.stiffness * y;
    Eigen::MatrixXd h = y.transpose() * ky;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(h);
    x = y * small.eigenvectors();
    const Eigen::MatrixXd kx = ky * small.eigenvectors();

    double worst = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double theta = small.eigenvalues()[j];
      // ||W^{-1} r||_w with r = K x - theta W x
      const Eigen::ArrayXd r = kx.col(j).array() - theta * w.array() * x.col(j).array();
      const double rn = std::sqrt((r.square() / w.array()).sum());
      worst = std::max(worst, rn / std::max(1.0, std::abs(theta)));
    }
    res.iterations = it;
    res.max_residual = worst;
    if (worst <= kResidualTol) {
      res.values = small.eigenvalues().head(m);
      res.vectors = x.leftCols(m);
      fix_signs(res.vectors, grid);
      return res;
    }
  }
  throw Error(Errc::convergence_failure,
              fmt::format("leading_eigs: no convergence after {} iterations (residual {:.3e})", kMaxIterations,
                          res.max_residual));
}

double energy_generator(const GridFunction& f, const Grid2D& grid) {
  if (static_cast<std::size_t>(f.size()) != grid.size()) {
    throw Error(Errc::dimension_mismatch, "energy_generator: grid function length does not match grid");
  }
  double sum = 0.0;
  for (int i2 = 0; i2 < grid.n2(); ++i2) {
    for (int i1 = 0; i1 < grid.n1(); ++i1) {
      const double here = f[static_cast<Eigen::Index>(grid.index(i1, i2))];
      if (i1 + 1 < grid.n1()) {
        const double d = (f[static_cast<Eigen::Index>(grid.index(i1 + 1, i2))] - here) / grid.h1();
        sum += grid.density(0.5 * (grid.node(i1, i2) + grid.node(i1 + 1, i2))) * d * d;
      }
      if (i2 + 1 < grid.n2()) {
        const double d = (f[static_cast<Eigen::Index>(grid.index(i1, i2 + 1))] - here) / grid.h2();
        sum += grid.density(0.5 * (grid.node(i1, i2) + grid.node(i1, i2 + 1))) * d * d;
      }
    }
  }
  return sum / grid.thermo().beta;
}

ResolutionReport resolution_check(const Grid2D& grid) {
  const Grid2D fine(grid.domain(), 2 * grid.n1() - 1, 2 * grid.n2() - 1, grid.potential(), grid.thermo());
  ResolutionReport r;
  r.lambda1_coarse = leading_eigs(fd_generator(grid), grid, 2).values[1];
  r.lambda1_fine = leading_eigs(fd_generator(fine), fine, 2).values[1];
  r.relative_change = std::abs(r.lambda1_coarse - r.lambda1_fine) / std::abs(r.lambda1_fine);
  r.too_coarse = r.relative_change > 0.2;
  return r;
}

IdentityCheck bochner_check(const Grid2D& grid, const SmoothFunction& f) {
  const double beta = grid.thermo().beta;
  const Potential& pot = grid.potential();
  IdentityCheck out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point2 x = grid.node(i);
    const double w = grid.weights()[static_cast<Eigen::Index>(i)];
    const Point2 g = f.gradient(x);
    const Matrix2 hf = f.hessian(x);
    const double lf = -pot.gradient(x).dot(g) + hf.trace() / beta;
    out.lhs += w * lf * lf;
    out.rhs += w * (g.dot(pot.hessian(x) * g) + hf.squaredNorm() / beta) / beta;
  }
  const double scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
  out.error = scale > 0.0 ? std::abs(out.lhs - out.rhs) / scale : 0.0;
  return out;
}

std::vector<GridFunction> orthonormalize(std::span<const GridFunction> xi, const Grid2D& grid) {
  const Eigen::VectorXd& w = grid.weights();
  std::vector<GridFunction> basis;
  for (const auto& f : xi) {
    if (static_cast<std::size_t>(f.size()) != grid.size()) {
      throw Error(Errc::dimension_mismatch, "orthonormalize: grid function length does not match grid");
    }
    GridFunction v = f.array() - weighted_mean(grid, f);
    const double before = std::sqrt((w.array() * f.array().square()).sum());
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) v -= weighted_inner(grid, b, v) * b;
    }
    const double nrm = std::sqrt(weighted_inner(grid, v, v));
    if (!(nrm > 1e-10 * before) || !(nrm > 1e-300)) {
      throw Error(Errc::degenerate_family, "slowness objective: family is constant or linearly dependent");
    }
    basis.push_back(v / nrm);
  }
  return basis;
}

SlownessTerms slowness_objective(std::span<const GridFunction> xi, const Grid2D& grid, const GeneratorMatrix& op,
                                 std::span<const double> omegas) {
  if (xi.size() != omegas.size()) throw Error(Errc::dimension_mismatch, "slowness_objective: one omega per function");
  const auto basis = orthonormalize(xi, grid);
  SlownessTerms t;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Eigen::VectorXd kf = op.stiffness * basis[i];
    t.drift += omegas[i] * (kf.array().square() / op.mass.array()).sum();
    t.diffusion += omegas[i] * grid.thermo().beta * energy_generator(basis[i], grid);
  }
  t.total = t.drift + t.diffusion;
  return t;
}

}  // namespace slowcv::oracle

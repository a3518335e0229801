#include "slowcv/effective.hpp"

#include "slowcv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace slowcv::oracle {

namespace {

constexpr Eigen::Index kChunk = 4096;

std::vector<std::size_t> order_by(const Eigen::VectorXd& z) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(z.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return z[static_cast<Eigen::Index>(a)] < z[static_cast<Eigen::Index>(b)];
  });
  return idx;
}

// [begin, end) of equal-count bin b among n samples.
std::pair<std::size_t, std::size_t> bin_range(std::size_t n, int n_bins, int b) {
  const auto nb = static_cast<std::size_t>(n_bins);
  return {n * static_cast<std::size_t>(b) / nb, n * static_cast<std::size_t>(b + 1) / nb};
}

}  // namespace

ScalarCv cv_from_model(const MlpModel& model) {
  if (model.spec().input_dim() != 2 || model.spec().output_dim() != 1) {
    throw Error(Errc::dimension_mismatch, "collective variable network must map R^2 -> R");
  }
  return [model](std::span<const Point2> pts) {
    CvSample s;
    const auto n = static_cast<Eigen::Index>(pts.size());
    s.value.resize(n);
    s.gradient.resize(2, n);
    for (Eigen::Index start = 0; start < n; start += kChunk) {
      const Eigen::Index len = std::min(kChunk, n - start);
      const Eigen::Matrix2Xd x = to_columns(pts.subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(len)));
      s.value.segment(start, len) = model.forward_batch(x).row(0).transpose();
      s.gradient.middleCols(start, len) = input_gradients(model, x);
    }
    return s;
  };
}

ScalarCv cv_from_grid(const Grid2D& grid, const GridFunction& f) {
  if (static_cast<std::size_t>(f.size()) != grid.size()) {
    throw Error(Errc::dimension_mismatch, "grid function length does not match grid");
  }
  return [grid, f](std::span<const Point2> pts) {
    CvSample s;
    const auto n = static_cast<Eigen::Index>(pts.size());
    s.value.resize(n);
    s.gradient.resize(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      s.value[i] = interpolate(grid, f, pts[static_cast<std::size_t>(i)]);
      s.gradient.col(i) = interpolate_gradient(grid, f, pts[static_cast<std::size_t>(i)]);
    }
    return s;
  };
}

ScalarCv cv_from_function(const SmoothFunction& f) {
  return [f](std::span<const Point2> pts) {
    CvSample s;
    const auto n = static_cast<Eigen::Index>(pts.size());
    s.value.resize(n);
    s.gradient.resize(2, n);
    s.laplacian.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Point2& x = pts[static_cast<std::size_t>(i)];
      s.value[i] = f.value(x);
      s.gradient.col(i) = f.gradient(x);
      s.laplacian[i] = f.hessian(x).trace();
    }
    return s;
  };
}

EffectiveResult effective_1d(std::span<const Point2> data, const ScalarCv& xi, const Potential& potential,
                             const Thermo& thermo, int n_bins) {
  if (n_bins < 3) throw Error(Errc::too_few_bins, "effective_1d: need at least 3 bins");
  if (data.size() < static_cast<std::size_t>(n_bins)) {
    throw Error(Errc::empty_bin, "effective_1d: fewer samples than bins");
  }
  const CvSample s = xi(data);
  const bool with_drift = s.laplacian.size() == s.value.size();
  const auto order = order_by(s.value);
  const double n = static_cast<double>(data.size());

  EffectiveResult res;
  for (int b = 0; b < n_bins; ++b) {
    const auto [lo, hi] = bin_range(data.size(), n_bins, b);
    EffectiveBin bin;
    bin.count = static_cast<long>(hi - lo);
    double b_sum = 0.0;
    for (std::size_t r = lo; r < hi; ++r) {
      const auto i = static_cast<Eigen::Index>(order[r]);
      bin.z += s.value[i];
      bin.a += s.gradient.col(i).squaredNorm();
      if (with_drift) {
        b_sum += -potential.gradient(data[order[r]]).dot(s.gradient.col(i)) + s.laplacian[i] / thermo.beta;
      }
    }
    bin.z /= static_cast<double>(bin.count);
    bin.a /= static_cast<double>(bin.count);
    bin.b = with_drift ? b_sum / static_cast<double>(bin.count) : std::numeric_limits<double>::quiet_NaN();
    bin.weight = static_cast<double>(bin.count) / n;
    res.bins.push_back(bin);
  }

  // Tridiagonal stiffness K and mass diag(q); solve the symmetric form
  // diag(q)^{-1/2} K diag(q)^{-1/2}.
  const Eigen::Index m = n_bins;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index f = 0; f + 1 < m; ++f) {
    const auto& l = res.bins[static_cast<std::size_t>(f)];
    const auto& r = res.bins[static_cast<std::size_t>(f + 1)];
    const double dz = r.z - l.z;
    if (!(dz > 0.0)) throw Error(Errc::empty_bin, "effective_1d: bins with coinciding CV values");
    const double c = 0.5 * (l.a + r.a) * 0.5 * (l.weight + r.weight) / (dz * dz) / thermo.beta;
    k(f, f) += c;
    k(f + 1, f + 1) += c;
    k(f, f + 1) -= c;
    k(f + 1, f) -= c;
  }
  Eigen::VectorXd isq(m);
  for (Eigen::Index i = 0; i < m; ++i) isq[i] = 1.0 / std::sqrt(res.bins[static_cast<std::size_t>(i)].weight);
  const Eigen::MatrixXd sym = isq.asDiagonal() * k * isq.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(Errc::convergence_failure, "effective_1d: eigensolver failed");
  res.lambda1 = es.eigenvalues()[1];
  return res;
}

ConditionalMoments conditional_moments(std::span<const StatePair> pairs, const MlpModel& enc, int n_bins) {
  if (enc.spec().input_dim() != 2 || enc.spec().output_dim() != 1) {
    throw Error(Errc::dimension_mismatch, "conditional_moments: encoder must map R^2 -> R");
  }
  if (n_bins < 1) throw Error(Errc::too_few_bins, "conditional_moments: need at least one bin");
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::VectorXd z(n);
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - start);
    Eigen::Matrix2Xd x(2, len);
    for (Eigen::Index i = 0; i < len; ++i) x.col(i) = pairs[static_cast<std::size_t>(start + i)].x;
    z.segment(start, len) = enc.forward_batch(x).row(0).transpose();
  }
  const auto order = order_by(z);

  ConditionalMoments out;
  for (int b = 0; b < n_bins; ++b) {
    const auto [lo, hi] = bin_range(pairs.size(), n_bins, b);
    if (hi == lo) {
      ++out.empty_bins;
      continue;
    }
    ConditionalBin bin;
    bin.count = static_cast<long>(hi - lo);
    bin.mean_y.setZero();
    for (std::size_t r = lo; r < hi; ++r) {
      bin.z += z[static_cast<Eigen::Index>(order[r])];
      bin.mean_y += pairs[order[r]].y;
    }
    bin.z /= static_cast<double>(bin.count);
    bin.mean_y /= static_cast<double>(bin.count);
    for (std::size_t r = lo; r < hi; ++r) bin.var_y += (pairs[order[r]].y - bin.mean_y).squaredNorm();
    bin.var_y /= static_cast<double>(bin.count);
    out.bins.push_back(bin);
  }
  return out;
}

}  // namespace slowcv::oracle

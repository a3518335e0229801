#pragma once

#include "slowcv/generator.hpp"
#include "slowcv/net.hpp"
#include "slowcv/sampler.hpp"

#include <functional>
#include <span>
#include <vector>

namespace slowcv::oracle {

// Scalar collective variable evaluated over a batch of points.
struct CvSample {
  Eigen::VectorXd value;
  Eigen::Matrix2Xd gradient;
  Eigen::VectorXd laplacian;  // empty when second derivatives are unavailable
};

using ScalarCv = std::function<CvSample(std::span<const Point2>)>;

ScalarCv cv_from_model(const MlpModel& model);
// Bilinear interpolant of a grid function; the interpolant's gradient is used.
ScalarCv cv_from_grid(const Grid2D& grid, const GridFunction& f);
ScalarCv cv_from_function(const SmoothFunction& f);

struct EffectiveBin {
  double z = 0.0;       // mean CV value in the bin
  double weight = 0.0;  // fraction of samples
  double a = 0.0;       // mean |grad xi|^2
  double b = 0.0;       // mean L xi (NaN without second derivatives)
  long count = 0;
};

struct EffectiveResult {
  double lambda1 = 0.0;
  std::vector<EffectiveBin> bins;
};

// 1D reversible effective dynamics of a scalar CV. Samples are split into
// n_bins equal-count bins in z = xi(x); the generator
//   (1/beta) Q^{-1} d/dz (Q a d/dz .)
// is discretised between bin means with face weight (q_k + q_{k+1}) / 2 /
// dz and face a = (a_k + a_{k+1}) / 2, reflecting at the ends. Returns the
// smallest nonzero eigenvalue. Throws Errc::too_few_bins (n_bins < 3) or
// Errc::empty_bin (fewer samples than bins, or coinciding bin means).
EffectiveResult effective_1d(std::span<const Point2> data, const ScalarCv& xi, const Potential& potential,
                             const Thermo& thermo, int n_bins);

struct ConditionalBin {
  double z = 0.0;  // mean encoder value in the bin
  Point2 mean_y;
  double var_y = 0.0;  // total variance (trace of the covariance)
  long count = 0;
};

struct ConditionalMoments {
  std::vector<ConditionalBin> bins;  // populated bins only
  int empty_bins = 0;
};

// Bins pairs by enc(x) into n_bins equal-count bins and returns the mean and
// total variance of the lagged endpoints y per bin.
ConditionalMoments conditional_moments(std::span<const StatePair> pairs, const MlpModel& enc, int n_bins);

}  // namespace slowcv::oracle

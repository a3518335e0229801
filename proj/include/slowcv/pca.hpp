#pragma once

#include "slowcv/net.hpp"
#include "slowcv/types.hpp"

#include <span>
#include <utility>

namespace slowcv::oracle {

struct PcaResult {
  Eigen::Vector2d mean;
  Eigen::MatrixXd basis;        // 2 x k, leading covariance eigenvectors
  Eigen::Vector2d eigenvalues;  // of the 1/N covariance, descending
  double residual = 0.0;        // sum_i |x_i - m - U U^T (x_i - m)|^2
};

// Throws Errc::too_few_samples for fewer than two points.
PcaResult pca(std::span<const Point2> points, int k);

// Linear tied autoencoder spanning the PCA subspace: encoder
// x -> U^T (x - m), decoder z -> U z + m, as single-layer networks.
std::pair<MlpModel, MlpModel> linear_autoencoder(const PcaResult& p);

}  // namespace slowcv::oracle

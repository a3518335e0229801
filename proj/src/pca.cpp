#include "slowcv/pca.hpp"

#include "slowcv/error.hpp"

namespace slowcv::oracle {

PcaResult pca(std::span<const Point2> points, int k) {
  if (points.size() < 2) throw Error(Errc::too_few_samples, "pca: need at least two points");
  if (k < 1 || k > 2) throw Error(Errc::invalid_argument, "pca: k must be 1 or 2");
  const auto n = static_cast<double>(points.size());

  PcaResult r;
  r.mean.setZero();
  for (const auto& p : points) r.mean += p;
  r.mean /= n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector2d c = p - r.mean;
    cov += c * c.transpose();
  }
  cov /= n;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  r.eigenvalues = es.eigenvalues().reverse();
  const Eigen::Matrix2d vecs = es.eigenvectors().rowwise().reverse();
  r.basis = vecs.leftCols(k);

  for (const auto& p : points) {
    const Eigen::Vector2d c = p - r.mean;
    r.residual += (c - r.basis * (r.basis.transpose() * c)).squaredNorm();
  }
  return r;
}

std::pair<MlpModel, MlpModel> linear_autoencoder(const PcaResult& p) {
  const int k = static_cast<int>(p.basis.cols());
  std::vector<double> enc;
  for (int i = 0; i < k; ++i) {
    enc.push_back(p.basis(0, i));
    enc.push_back(p.basis(1, i));
  }
  const Eigen::VectorXd shift = -p.basis.transpose() * p.mean;
  enc.insert(enc.end(), shift.data(), shift.data() + k);

  std::vector<double> dec;
  for (int r = 0; r < 2; ++r) {
    for (int i = 0; i < k; ++i) dec.push_back(p.basis(r, i));
  }
  dec.push_back(p.mean[0]);
  dec.push_back(p.mean[1]);
  return {MlpModel(MlpSpec{{2, k}}, std::move(enc)), MlpModel(MlpSpec{{k, 2}}, std::move(dec))};
}

}  // namespace slowcv::oracle

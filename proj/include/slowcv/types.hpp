#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace slowcv {

using Point2 = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

// Axis-aligned rectangle [x1_min, x1_max] x [x2_min, x2_max].
struct Domain {
  double x1_min = 0.0;
  double x1_max = 1.0;
  double x2_min = 0.0;
  double x2_max = 1.0;

  bool contains(const Point2& x) const {
    return x[0] >= x1_min && x[0] <= x1_max && x[1] >= x2_min && x[1] <= x2_max;
  }
};

// Packs points as the columns of a 2 x n matrix.
inline Eigen::Matrix2Xd to_columns(std::span<const Point2> points) {
  Eigen::Matrix2Xd out(2, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = points[i];
  return out;
}

}  // namespace slowcv

#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace gann {

/// Squared Euclidean distance with 32-bit accumulation, matching the
/// float arithmetic of common ANN implementations.
template <typename DerivedA, typename DerivedB>
float squared_distance(const Eigen::MatrixBase<DerivedA>& x,
                       const Eigen::MatrixBase<DerivedB>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("squared_distance: dimensionality mismatch");
  }
  return (x.derived().template cast<float>() -
          y.derived().template cast<float>())
      .squaredNorm();
}

/// Euclidean (l2) distance between two vectors of equal dimension.
template <typename DerivedA, typename DerivedB>
float euclidean_distance(const Eigen::MatrixBase<DerivedA>& x,
                         const Eigen::MatrixBase<DerivedB>& y) {
  return std::sqrt(squared_distance(x, y));
}

}  // namespace gann

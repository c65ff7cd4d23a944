#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace gann {

using VertexId = std::uint32_t;

/// Row-major dense storage so that one vector occupies one contiguous row.
template <typename Scalar>
using RowMajorMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MatrixXfR = RowMajorMatrix<float>;
using MatrixXiR = RowMajorMatrix<std::int32_t>;

using VectorXf = Eigen::VectorXf;

}  // namespace gann

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace agginc {

/// One sample per row.
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Non-owning view of a point in R^d.
using Point = std::span<const double>;

inline Point row(const SampleMatrix& samples, Eigen::Index i) {
  return {samples.data() + i * samples.cols(), static_cast<std::size_t>(samples.cols())};
}

}  // namespace agginc

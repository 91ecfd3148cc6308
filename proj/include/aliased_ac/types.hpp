#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <span>

namespace aliased_ac {

/// Row-major dense matrix; probability tables are stored one distribution
/// per row so a row can be handed out as a contiguous span.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index row) {
  return {m.data() + row * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Tolerance on row sums of every stochastic table.
inline constexpr double kSimplexTolerance = 1e-12;

}  // namespace aliased_ac

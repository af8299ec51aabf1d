#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace equiride {

struct LinearSolution {
  Eigen::VectorXd coef;              // dropped columns hold 0
  std::vector<std::size_t> dropped;  // column indices removed as collinear
  double rss{0.0};
  std::size_t rows{0};
};

// Ordinary least squares accumulated row-block by row-block. Rows are folded
// into an (k+1)x(k+1) triangular factor of [X | y] with Householder QR, so
// memory stays O(k^2) however many rows are streamed and the solution is as
// accurate as a direct QR of the full design.
class LeastSquares {
public:
  explicit LeastSquares(std::size_t columns, std::size_t block_rows = 4096);

  void add_row(std::span<double const> x, double y);
  void add_rows(Eigen::Ref<Eigen::MatrixXd const> x, Eigen::Ref<Eigen::VectorXd const> y);

  std::size_t columns() const { return k_; }
  std::size_t rows() const { return rows_; }

  // Columns are tested for linear dependence in order. A dependent column is
  // dropped if droppable[j] is set (empty span: none droppable); otherwise an
  // estimation_error names it using `names` when given.
  LinearSolution solve(std::span<bool const> droppable = {},
                       std::span<std::string const> names = {}) const;

private:
  void flush() const;

  std::size_t k_;
  std::size_t block_rows_;
  std::size_t rows_{0};
  mutable Eigen::MatrixXd r_;
  mutable Eigen::MatrixXd pending_;
  mutable std::size_t n_pending_{0};
};

// Convenience for small dense problems; throws on rank deficiency.
LinearSolution fit_ols(Eigen::Ref<Eigen::MatrixXd const> x, Eigen::Ref<Eigen::VectorXd const> y,
                       std::span<std::string const> names = {});

}  // namespace equiride

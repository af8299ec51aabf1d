#include "equiride/least_squares.h"

#include <algorithm>

#include "equiride/error.h"

namespace equiride {

namespace {
constexpr double kRankTolerance = 1e-10;
}

LeastSquares::LeastSquares(std::size_t columns, std::size_t block_rows)
    : k_{columns},
      block_rows_{std::max<std::size_t>(block_rows, columns + 1)},
      r_{Eigen::MatrixXd::Zero(columns + 1, columns + 1)},
      pending_{block_rows_, columns + 1} {}

void LeastSquares::add_row(std::span<double const> x, double y) {
  if (x.size() != k_) throw argument_error{"row width does not match design width"};
  if (n_pending_ == block_rows_) flush();
  for (std::size_t j = 0; j < k_; ++j) pending_(n_pending_, j) = x[j];
  pending_(n_pending_, k_) = y;
  ++n_pending_;
  ++rows_;
}

void LeastSquares::add_rows(Eigen::Ref<Eigen::MatrixXd const> x,
                            Eigen::Ref<Eigen::VectorXd const> y) {
  if (static_cast<std::size_t>(x.cols()) != k_ || x.rows() != y.size()) {
    throw argument_error{"design block shape mismatch"};
  }
  std::vector<double> row(k_);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < k_; ++j) row[j] = x(i, static_cast<Eigen::Index>(j));
    add_row(row, y(i));
  }
}

void LeastSquares::flush() const {
  if (n_pending_ == 0) return;
  auto const w = static_cast<Eigen::Index>(k_ + 1);
  Eigen::MatrixXd stacked(w + static_cast<Eigen::Index>(n_pending_), w);
  stacked.topRows(w) = r_;
  stacked.bottomRows(static_cast<Eigen::Index>(n_pending_)) =
      pending_.topRows(static_cast<Eigen::Index>(n_pending_));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr{stacked};
  r_ = qr.matrixQR().topRows(w).triangularView<Eigen::Upper>();
  n_pending_ = 0;
}

LinearSolution LeastSquares::solve(std::span<bool const> droppable,
                                   std::span<std::string const> names) const {
  flush();
  auto const k = static_cast<Eigen::Index>(k_);
  Eigen::MatrixXd const rx = r_.topLeftCorner(k, k);
  Eigen::VectorXd const ry = r_.topRightCorner(k, 1);

  Eigen::VectorXd norms(k);
  for (Eigen::Index j = 0; j < k; ++j) norms(j) = rx.col(j).norm();
  double const max_norm = k > 0 ? norms.maxCoeff() : 0.0;

  std::vector<Eigen::Index> kept;
  std::vector<std::size_t> dependent;
  for (Eigen::Index j = 0; j < k; ++j) {
    bool independent = norms(j) > kRankTolerance * std::max(max_norm, 1.0);
    if (independent) {
      Eigen::MatrixXd trial(k, static_cast<Eigen::Index>(kept.size()) + 1);
      for (std::size_t c = 0; c < kept.size(); ++c) {
        trial.col(static_cast<Eigen::Index>(c)) = rx.col(kept[c]) / norms(kept[c]);
      }
      trial.col(trial.cols() - 1) = rx.col(j) / norms(j);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr{trial};
      qr.setThreshold(kRankTolerance);
      independent = qr.rank() == trial.cols();
    }
    if (independent) {
      kept.push_back(j);
    } else {
      dependent.push_back(static_cast<std::size_t>(j));
    }
  }

  std::vector<std::size_t> fatal;
  for (auto const j : dependent) {
    if (droppable.empty() || !droppable[j]) fatal.push_back(j);
  }
  if (!fatal.empty()) {
    std::string msg = "design matrix is rank deficient; collinear columns:";
    for (auto const j : fatal) {
      msg += " " + (j < names.size() ? names[j] : "#" + std::to_string(j));
    }
    throw estimation_error{msg};
  }

  LinearSolution sol;
  sol.coef = Eigen::VectorXd::Zero(k);
  sol.dropped = std::move(dependent);
  sol.rows = rows_;
  if (!kept.empty()) {
    Eigen::MatrixXd sub(k, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
      sub.col(static_cast<Eigen::Index>(c)) = rx.col(kept[c]);
    }
    Eigen::VectorXd const beta = sub.colPivHouseholderQr().solve(ry);
    for (std::size_t c = 0; c < kept.size(); ++c) {
      sol.coef(kept[c]) = beta(static_cast<Eigen::Index>(c));
    }
    sol.rss = (sub * beta - ry).squaredNorm() + r_(k, k) * r_(k, k);
  } else {
    sol.rss = ry.squaredNorm() + r_(k, k) * r_(k, k);
  }
  return sol;
}

LinearSolution fit_ols(Eigen::Ref<Eigen::MatrixXd const> x, Eigen::Ref<Eigen::VectorXd const> y,
                       std::span<std::string const> names) {
  LeastSquares ls{static_cast<std::size_t>(x.cols()),
                  static_cast<std::size_t>(std::max<Eigen::Index>(x.rows(), 1))};
  ls.add_rows(x, y);
  return ls.solve({}, names);
}

}  // namespace equiride

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "stressfuse/common/error.hpp"
#include "stressfuse/common/log.hpp"
#include "stressfuse/select/select.hpp"

namespace stressfuse::select {
namespace {

using Eigen::LLT;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Ridge fits run in the dual, beta = X^T (X X^T + lambda I)^{-1} y, so that
// dropping column j is a rank-1 downdate of the n x n Cholesky factor.
class DualRidge {
 public:
  DualRidge(MatrixXd x, VectorXd y, double lambda) : x_(std::move(x)), y_(std::move(y)), lambda_(lambda) {
    active_.assign(static_cast<std::size_t>(x_.cols()), true);
    refactor();
  }

  VectorXd coefficients() const {
    const VectorXd alpha = llt_.solve(y_);
    VectorXd beta = VectorXd::Zero(x_.cols());
    for (Eigen::Index j = 0; j < x_.cols(); ++j)
      if (active_[static_cast<std::size_t>(j)]) beta(j) = x_.col(j).dot(alpha);
    return beta;
  }

  void remove(std::size_t j) {
    active_[j] = false;
    ++since_refactor_;
    VectorXd v = x_.col(static_cast<Eigen::Index>(j));
    llt_.rankUpdate(v, -1.0);
    if (llt_.info() != Eigen::Success || since_refactor_ >= kRefactorEvery) refactor();
  }

 private:
  static constexpr int kRefactorEvery = 128;

  void refactor() {
    MatrixXd k = MatrixXd::Identity(x_.rows(), x_.rows()) * lambda_;
    for (Eigen::Index j = 0; j < x_.cols(); ++j)
      if (active_[static_cast<std::size_t>(j)]) k.selfadjointView<Eigen::Lower>().rankUpdate(x_.col(j));
    k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
    llt_.compute(k);
    if (llt_.info() != Eigen::Success) throw NumericError("ridge system is not positive definite");
    since_refactor_ = 0;
  }

  MatrixXd x_;
  VectorXd y_;
  double lambda_;
  std::vector<bool> active_;
  LLT<MatrixXd> llt_;
  int since_refactor_ = 0;
};

}  // namespace

SelectionReport rfe(const Matrix& x, std::span<const double> y, std::size_t k, std::size_t step) {
  const std::size_t n = x.rows, p = x.cols;
  if (y.size() != n) throw ShapeError("target length does not match row count");
  if (p == 0) throw EmptyMatrixError("no feature columns");
  if (k == 0 || k > p) throw SpecError("rfe needs 1 <= k <= n_features");
  if (step == 0) throw SpecError("rfe step must be positive");

  MatrixXd xm(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) xm(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x(r, c);
  xm.rowwise() -= xm.colwise().mean();
  VectorXd ym(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) ym(static_cast<Eigen::Index>(r)) = y[r];
  ym.array() -= ym.mean();

  DualRidge ridge(std::move(xm), std::move(ym), kRfeRidge);
  std::vector<std::size_t> active(p);
  std::iota(active.begin(), active.end(), 0);
  std::vector<std::size_t> eliminated;  // in elimination order

  while (active.size() > k) {
    const VectorXd beta = ridge.coefficients();
    // Weakest first; among equal magnitudes the higher index goes first.
    std::vector<std::size_t> order = active;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double fa = std::abs(beta(static_cast<Eigen::Index>(a)));
      const double fb = std::abs(beta(static_cast<Eigen::Index>(b)));
      if (fa != fb) return fa < fb;
      return a > b;
    });
    const std::size_t drop = std::min(step, active.size() - k);
    for (std::size_t t = 0; t < drop; ++t) {
      ridge.remove(order[t]);
      eliminated.push_back(order[t]);
    }
    std::vector<std::size_t> keep(order.begin() + static_cast<std::ptrdiff_t>(drop), order.end());
    std::sort(keep.begin(), keep.end());
    active = std::move(keep);
  }

  const VectorXd beta = ridge.coefficients();
  std::sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
    const double fa = std::abs(beta(static_cast<Eigen::Index>(a)));
    const double fb = std::abs(beta(static_cast<Eigen::Index>(b)));
    if (fa != fb) return fa > fb;
    return a < b;
  });

  SelectionReport rep;
  rep.method = "rfe";
  rep.k = k;
  rep.selected = active;
  rep.ranking = active;
  rep.ranking.insert(rep.ranking.end(), eliminated.rbegin(), eliminated.rend());
  rep.scores.assign(p, 0.0);
  for (std::size_t r = 0; r < p; ++r) rep.scores[rep.ranking[r]] = static_cast<double>(p - r);
  return rep;
}

}  // namespace stressfuse::select

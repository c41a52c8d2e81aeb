#include <algorithm>
#include <cmath>
#include <numeric>

#include "stressfuse/common/error.hpp"
#include "stressfuse/select/select.hpp"

namespace stressfuse::select {
namespace {

void check_finite(const Matrix& x, std::span<const double> y) {
  for (double v : x.data)
    if (!std::isfinite(v)) throw NumericError("lasso input X holds a non-finite value");
  for (double v : y)
    if (!std::isfinite(v)) throw NumericError("lasso target holds a non-finite value");
  if (y.size() != x.rows) throw ShapeError("lasso target length does not match row count");
  if (x.rows == 0) throw LengthError("lasso needs at least one row");
}

double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

}  // namespace

double lasso_lambda_max(const Matrix& x, std::span<const double> y) {
  check_finite(x, y);
  const double n = static_cast<double>(x.rows);
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  std::vector<double> dot(x.cols, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double yr = y[r] - ym;
    const auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols; ++c) dot[c] += row[c] * yr;
  }
  double best = 0.0;
  for (double d : dot) best = std::max(best, std::abs(d) / n);
  return best;
}

LassoFit lasso_fit(const Matrix& x, std::span<const double> y, double lambda, const LassoOptions& opts,
                   std::span<const double> warm_start) {
  check_finite(x, y);
  if (!(lambda >= 0.0)) throw SpecError("lambda must be >= 0");
  const std::size_t n = x.rows, p = x.cols;
  const double nd = static_cast<double>(n);

  // Column-major, column-centred copy: the intercept then decouples and
  // equals mean(y) - sum_j mean_j b_j.
  std::vector<double> cols(n * p), col_mean(p, 0.0), col_sq(p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) col_mean[c] += x(r, c);
  for (auto& m : col_mean) m /= nd;
  for (std::size_t c = 0; c < p; ++c) {
    double* dst = &cols[c * n];
    for (std::size_t r = 0; r < n; ++r) {
      dst[r] = x(r, c) - col_mean[c];
      col_sq[c] += dst[r] * dst[r];
    }
    col_sq[c] /= nd;
  }
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / nd;

  LassoFit fit;
  fit.beta.assign(p, 0.0);
  if (!warm_start.empty()) {
    if (warm_start.size() != p) throw ShapeError("warm start length does not match column count");
    std::copy(warm_start.begin(), warm_start.end(), fit.beta.begin());
  }
  std::vector<double> resid(n);
  for (std::size_t r = 0; r < n; ++r) resid[r] = y[r] - ym;
  for (std::size_t c = 0; c < p; ++c) {
    if (fit.beta[c] == 0.0) continue;
    const double* xc = &cols[c * n];
    for (std::size_t r = 0; r < n; ++r) resid[r] -= xc[r] * fit.beta[c];
  }

  // One coordinate pass over `which`; returns the largest coefficient change.
  auto sweep = [&](const std::vector<std::size_t>& which) {
    double max_change = 0.0;
    for (std::size_t c : which) {
      if (!(col_sq[c] > 0.0)) {
        fit.beta[c] = 0.0;
        continue;
      }
      const double* xc = &cols[c * n];
      const double old = fit.beta[c];
      double rho = 0.0;
      for (std::size_t r = 0; r < n; ++r) rho += xc[r] * resid[r];
      rho = rho / nd + col_sq[c] * old;
      const double b = soft_threshold(rho, lambda) / col_sq[c];
      const double delta = b - old;
      if (delta != 0.0) {
        for (std::size_t r = 0; r < n; ++r) resid[r] -= xc[r] * delta;
        fit.beta[c] = b;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    return max_change;
  };

  // Sweeps over the nonzero set keep the gradient x_j . r / n up to date
  // through the Gram matrix of that set, O(|A|^2) per sweep instead of
  // O(|A| n); the residual is rebuilt once the set's sweeps settle.
  auto active_sweeps = [&](const std::vector<std::size_t>& act) {
    const std::size_t a = act.size();
    std::vector<double> gram(a * a), grad(a), entry(a);
    for (std::size_t i = 0; i < a; ++i) {
      const double* xi = &cols[act[i] * n];
      for (std::size_t j = i; j < a; ++j) {
        const double* xj = &cols[act[j] * n];
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s += xi[r] * xj[r];
        gram[i * a + j] = gram[j * a + i] = s / nd;
      }
      double g = 0.0;
      for (std::size_t r = 0; r < n; ++r) g += xi[r] * resid[r];
      grad[i] = g / nd;
      entry[i] = fit.beta[act[i]];
    }
    while (fit.sweeps < opts.max_sweeps) {
      ++fit.sweeps;
      double max_change = 0.0;
      for (std::size_t i = 0; i < a; ++i) {
        const std::size_t c = act[i];
        const double old = fit.beta[c];
        const double b = soft_threshold(grad[i] + col_sq[c] * old, lambda) / col_sq[c];
        const double delta = b - old;
        if (delta == 0.0) continue;
        fit.beta[c] = b;
        const double* gc = &gram[i * a];
        for (std::size_t j = 0; j < a; ++j) grad[j] -= gc[j] * delta;
        max_change = std::max(max_change, std::abs(delta));
      }
      if (max_change < opts.tol) break;
    }
    for (std::size_t i = 0; i < a; ++i) {
      const double delta = fit.beta[act[i]] - entry[i];
      if (delta == 0.0) continue;
      const double* xc = &cols[act[i] * n];
      for (std::size_t r = 0; r < n; ++r) resid[r] -= xc[r] * delta;
    }
  };

  // Full sweeps alternate with sweeps over the nonzero set until the nonzero
  // set converges; convergence is only declared on a full sweep.
  std::vector<std::size_t> all(p), active;
  std::iota(all.begin(), all.end(), 0);
  fit.sweeps = 0;
  while (fit.sweeps < opts.max_sweeps) {
    ++fit.sweeps;
    if (sweep(all) < opts.tol) {
      fit.converged = true;
      break;
    }
    active.clear();
    for (std::size_t c = 0; c < p; ++c)
      if (fit.beta[c] != 0.0 && col_sq[c] > 0.0) active.push_back(c);
    active_sweeps(active);
  }
  fit.sweeps = std::min(fit.sweeps, opts.max_sweeps);
  fit.intercept = ym;
  for (std::size_t c = 0; c < p; ++c) fit.intercept -= col_mean[c] * fit.beta[c];
  return fit;
}

}  // namespace stressfuse::select

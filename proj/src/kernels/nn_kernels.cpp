#include "stressfuse/kernels/nn_kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <cstring>

namespace stressfuse::kernels {
namespace {

using idx_t = std::int64_t;

inline void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void bias_grad(const double* gy, double* gb, std::size_t rows, std::size_t cout) {
  std::fill(gb, gb + cout, 0.0);
  for (std::size_t r = 0; r < rows; ++r) axpy(1.0, gy + r * cout, gb, cout);
}

}  // namespace

// Dense layers are plain matrix products, delegated to Eigen's blocked GEMM.
// Each output element is still produced by a single fixed-order reduction,
// so results are independent of the thread count.
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

void dense_forward(const double* x, const double* w, const double* b, double* y, const DenseDims& d) {
  const auto n = static_cast<Eigen::Index>(d.n), in = static_cast<Eigen::Index>(d.in),
             out = static_cast<Eigen::Index>(d.out);
  MutMap ym(y, n, out);
  ym.noalias() = ConstMap(x, n, in) * ConstMap(w, in, out);
  ym.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b, out);
}

void dense_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                    const DenseDims& d) {
  const auto n = static_cast<Eigen::Index>(d.n), in = static_cast<Eigen::Index>(d.in),
             out = static_cast<Eigen::Index>(d.out);
  const ConstMap gym(gy, n, out);
  MutMap(gw, in, out).noalias() = ConstMap(x, n, in).transpose() * gym;
  if (gx) MutMap(gx, n, in).noalias() = gym * ConstMap(w, in, out).transpose();
  bias_grad(gy, gb, d.n, d.out);
}

void conv1d_forward(const double* x, const double* w, const double* b, double* y, const Conv1dDims& d) {
  const std::size_t lo = d.out_len();
#pragma omp parallel for schedule(static)
  for (idx_t n = 0; n < static_cast<idx_t>(d.n); ++n) {
    const double* xn = x + static_cast<std::size_t>(n) * d.len * d.cin;
    double* yn = y + static_cast<std::size_t>(n) * lo * d.cout;
    for (std::size_t t = 0; t < lo; ++t) {
      double* yt = yn + t * d.cout;
      std::copy(b, b + d.cout, yt);
      // Window rows t..t+k-1 are contiguous in x and match w's [k][cin] rows.
      const double* xt = xn + t * d.cin;
      for (std::size_t r = 0; r < d.k * d.cin; ++r) axpy(xt[r], w + r * d.cout, yt, d.cout);
    }
  }
}

void conv1d_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                     const Conv1dDims& d) {
  const std::size_t lo = d.out_len();
  const std::size_t rows = d.k * d.cin;
#pragma omp parallel
  {
#pragma omp for schedule(static) nowait
    for (idx_t r = 0; r < static_cast<idx_t>(rows); ++r) {
      double* gwr = gw + static_cast<std::size_t>(r) * d.cout;
      std::fill(gwr, gwr + d.cout, 0.0);
      for (std::size_t n = 0; n < d.n; ++n) {
        const double* xn = x + n * d.len * d.cin + static_cast<std::size_t>(r);
        const double* gyn = gy + n * lo * d.cout;
        for (std::size_t t = 0; t < lo; ++t) axpy(xn[t * d.cin], gyn + t * d.cout, gwr, d.cout);
      }
    }
    if (gx) {
#pragma omp for schedule(static) nowait
      for (idx_t n = 0; n < static_cast<idx_t>(d.n); ++n) {
        double* gxn = gx + static_cast<std::size_t>(n) * d.len * d.cin;
        const double* gyn = gy + static_cast<std::size_t>(n) * lo * d.cout;
        std::fill(gxn, gxn + d.len * d.cin, 0.0);
        for (std::size_t t = 0; t < lo; ++t) {
          double* gxt = gxn + t * d.cin;
          for (std::size_t r = 0; r < rows; ++r) gxt[r] += dot(w + r * d.cout, gyn + t * d.cout, d.cout);
        }
      }
    }
  }
  bias_grad(gy, gb, d.n * lo, d.cout);
}

void conv2d_forward(const double* x, const double* w, const double* b, double* y, const Conv2dDims& d) {
  const std::size_t oh = d.out_h(), ow = d.out_w();
  const std::size_t row_span = d.kw * d.cin;  // contiguous input run per kernel row
#pragma omp parallel for schedule(static)
  for (idx_t n = 0; n < static_cast<idx_t>(d.n); ++n) {
    const double* xn = x + static_cast<std::size_t>(n) * d.h * d.w * d.cin;
    double* yn = y + static_cast<std::size_t>(n) * oh * ow * d.cout;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double* yij = yn + (i * ow + j) * d.cout;
        std::copy(b, b + d.cout, yij);
        for (std::size_t a = 0; a < d.kh; ++a) {
          const double* xrow = xn + ((i + a) * d.w + j) * d.cin;
          const double* wrow = w + a * row_span * d.cout;
          for (std::size_t r = 0; r < row_span; ++r) axpy(xrow[r], wrow + r * d.cout, yij, d.cout);
        }
      }
    }
  }
}

void conv2d_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                     const Conv2dDims& d) {
  const std::size_t oh = d.out_h(), ow = d.out_w();
  const std::size_t row_span = d.kw * d.cin;
  const std::size_t rows = d.kh * row_span;
#pragma omp parallel
  {
#pragma omp for schedule(static) nowait
    for (idx_t r = 0; r < static_cast<idx_t>(rows); ++r) {
      const std::size_t ru = static_cast<std::size_t>(r);
      const std::size_t a = ru / row_span, rem = ru % row_span;
      double* gwr = gw + ru * d.cout;
      std::fill(gwr, gwr + d.cout, 0.0);
      for (std::size_t n = 0; n < d.n; ++n) {
        const double* xn = x + n * d.h * d.w * d.cin;
        const double* gyn = gy + n * oh * ow * d.cout;
        for (std::size_t i = 0; i < oh; ++i)
          for (std::size_t j = 0; j < ow; ++j)
            axpy(xn[((i + a) * d.w + j) * d.cin + rem], gyn + (i * ow + j) * d.cout, gwr, d.cout);
      }
    }
    if (gx) {
#pragma omp for schedule(static) nowait
      for (idx_t n = 0; n < static_cast<idx_t>(d.n); ++n) {
        double* gxn = gx + static_cast<std::size_t>(n) * d.h * d.w * d.cin;
        const double* gyn = gy + static_cast<std::size_t>(n) * oh * ow * d.cout;
        std::fill(gxn, gxn + d.h * d.w * d.cin, 0.0);
        for (std::size_t i = 0; i < oh; ++i)
          for (std::size_t j = 0; j < ow; ++j) {
            const double* g = gyn + (i * ow + j) * d.cout;
            for (std::size_t a = 0; a < d.kh; ++a) {
              double* gxrow = gxn + ((i + a) * d.w + j) * d.cin;
              const double* wrow = w + a * row_span * d.cout;
              for (std::size_t r = 0; r < row_span; ++r) gxrow[r] += dot(wrow + r * d.cout, g, d.cout);
            }
          }
      }
    }
  }
  bias_grad(gy, gb, d.n * oh * ow, d.cout);
}

// Pools sweep whole channel rows so the compare-and-select vectorizes.
// Strict > keeps the first maximum on ties.
void maxpool1d_forward(const double* x, double* y, std::size_t* argmax, const Pool1dDims& d) {
  const std::size_t lo = d.out_len();
#pragma omp parallel for schedule(static)
  for (idx_t n = 0; n < static_cast<idx_t>(d.n); ++n) {
    const double* xn = x + static_cast<std::size_t>(n) * d.len * d.c;
    const std::size_t base_out = static_cast<std::size_t>(n) * lo * d.c;
    for (std::size_t t = 0; t < lo; ++t) {
      double* yr = y + base_out + t * d.c;
      std::size_t* ar = argmax + base_out + t * d.c;
      const std::size_t first = t * d.stride * d.c;
      for (std::size_t c = 0; c < d.c; ++c) {
        yr[c] = xn[first + c];
        ar[c] = first + c;
      }
      for (std::size_t q = 1; q < d.k; ++q) {
        const std::size_t off = (t * d.stride + q) * d.c;
        const double* xr = xn + off;
        for (std::size_t c = 0; c < d.c; ++c) {
          const bool gt = xr[c] > yr[c];
          yr[c] = gt ? xr[c] : yr[c];
          ar[c] = gt ? off + c : ar[c];
        }
      }
    }
  }
}

void maxpool2d_forward(const double* x, double* y, std::size_t* argmax, const Pool2dDims& d) {
  const std::size_t oh = d.out_h(), ow = d.out_w();
#pragma omp parallel for schedule(static)
  for (idx_t n = 0; n < static_cast<idx_t>(d.n); ++n) {
    const double* xn = x + static_cast<std::size_t>(n) * d.h * d.w * d.c;
    const std::size_t base_out = static_cast<std::size_t>(n) * oh * ow * d.c;
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        double* yr = y + base_out + (i * ow + j) * d.c;
        std::size_t* ar = argmax + base_out + (i * ow + j) * d.c;
        const std::size_t first = ((i * d.stride) * d.w + j * d.stride) * d.c;
        for (std::size_t c = 0; c < d.c; ++c) {
          yr[c] = xn[first + c];
          ar[c] = first + c;
        }
        for (std::size_t a = 0; a < d.k; ++a)
          for (std::size_t bb = 0; bb < d.k; ++bb) {
            if (a == 0 && bb == 0) continue;
            const std::size_t off = ((i * d.stride + a) * d.w + j * d.stride + bb) * d.c;
            const double* xr = xn + off;
            for (std::size_t c = 0; c < d.c; ++c) {
              const bool gt = xr[c] > yr[c];
              yr[c] = gt ? xr[c] : yr[c];
              ar[c] = gt ? off + c : ar[c];
            }
          }
      }
  }
}

void maxpool_backward(const double* gy, const std::size_t* argmax, double* gx, std::size_t n, std::size_t in_per_sample,
                      std::size_t out_per_sample) {
#pragma omp parallel for schedule(static)
  for (idx_t s = 0; s < static_cast<idx_t>(n); ++s) {
    double* gxs = gx + static_cast<std::size_t>(s) * in_per_sample;
    std::fill(gxs, gxs + in_per_sample, 0.0);
    const std::size_t base = static_cast<std::size_t>(s) * out_per_sample;
    for (std::size_t o = 0; o < out_per_sample; ++o) gxs[argmax[base + o]] += gy[base + o];
  }
}

namespace ref {

void dense_forward(const double* x, const double* w, const double* b, double* y, const DenseDims& d) {
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t o = 0; o < d.out; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < d.in; ++i) s += x[n * d.in + i] * w[i * d.out + o];
      y[n * d.out + o] = s;
    }
}

void dense_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                    const DenseDims& d) {
  for (std::size_t o = 0; o < d.out; ++o) {
    gb[o] = 0.0;
    for (std::size_t n = 0; n < d.n; ++n) gb[o] += gy[n * d.out + o];
  }
  for (std::size_t i = 0; i < d.in; ++i)
    for (std::size_t o = 0; o < d.out; ++o) {
      double s = 0.0;
      for (std::size_t n = 0; n < d.n; ++n) s += x[n * d.in + i] * gy[n * d.out + o];
      gw[i * d.out + o] = s;
    }
  if (!gx) return;
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t i = 0; i < d.in; ++i) {
      double s = 0.0;
      for (std::size_t o = 0; o < d.out; ++o) s += w[i * d.out + o] * gy[n * d.out + o];
      gx[n * d.in + i] = s;
    }
}

void conv1d_forward(const double* x, const double* w, const double* b, double* y, const Conv1dDims& d) {
  const std::size_t lo = d.out_len();
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t t = 0; t < lo; ++t)
      for (std::size_t o = 0; o < d.cout; ++o) {
        double s = b[o];
        for (std::size_t q = 0; q < d.k; ++q)
          for (std::size_t c = 0; c < d.cin; ++c)
            s += x[(n * d.len + t + q) * d.cin + c] * w[(q * d.cin + c) * d.cout + o];
        y[(n * lo + t) * d.cout + o] = s;
      }
}

void conv1d_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                     const Conv1dDims& d) {
  const std::size_t lo = d.out_len();
  std::fill(gb, gb + d.cout, 0.0);
  std::fill(gw, gw + d.k * d.cin * d.cout, 0.0);
  if (gx) std::fill(gx, gx + d.n * d.len * d.cin, 0.0);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t t = 0; t < lo; ++t)
      for (std::size_t o = 0; o < d.cout; ++o) {
        const double g = gy[(n * lo + t) * d.cout + o];
        gb[o] += g;
        for (std::size_t q = 0; q < d.k; ++q)
          for (std::size_t c = 0; c < d.cin; ++c) {
            const std::size_t xi = (n * d.len + t + q) * d.cin + c;
            const std::size_t wi = (q * d.cin + c) * d.cout + o;
            gw[wi] += x[xi] * g;
            if (gx) gx[xi] += w[wi] * g;
          }
      }
}

void conv2d_forward(const double* x, const double* w, const double* b, double* y, const Conv2dDims& d) {
  const std::size_t oh = d.out_h(), ow = d.out_w();
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j)
        for (std::size_t o = 0; o < d.cout; ++o) {
          double s = b[o];
          for (std::size_t a = 0; a < d.kh; ++a)
            for (std::size_t bb = 0; bb < d.kw; ++bb)
              for (std::size_t c = 0; c < d.cin; ++c)
                s += x[((n * d.h + i + a) * d.w + j + bb) * d.cin + c] *
                     w[((a * d.kw + bb) * d.cin + c) * d.cout + o];
          y[((n * oh + i) * ow + j) * d.cout + o] = s;
        }
}

void conv2d_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                     const Conv2dDims& d) {
  const std::size_t oh = d.out_h(), ow = d.out_w();
  std::fill(gb, gb + d.cout, 0.0);
  std::fill(gw, gw + d.kh * d.kw * d.cin * d.cout, 0.0);
  if (gx) std::fill(gx, gx + d.n * d.h * d.w * d.cin, 0.0);
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j)
        for (std::size_t o = 0; o < d.cout; ++o) {
          const double g = gy[((n * oh + i) * ow + j) * d.cout + o];
          gb[o] += g;
          for (std::size_t a = 0; a < d.kh; ++a)
            for (std::size_t bb = 0; bb < d.kw; ++bb)
              for (std::size_t c = 0; c < d.cin; ++c) {
                const std::size_t xi = ((n * d.h + i + a) * d.w + j + bb) * d.cin + c;
                const std::size_t wi = ((a * d.kw + bb) * d.cin + c) * d.cout + o;
                gw[wi] += x[xi] * g;
                if (gx) gx[xi] += w[wi] * g;
              }
        }
}

void maxpool1d_forward(const double* x, double* y, std::size_t* argmax, const Pool1dDims& d) {
  const std::size_t lo = d.out_len();
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t t = 0; t < lo; ++t)
      for (std::size_t c = 0; c < d.c; ++c) {
        std::size_t best = 0;
        double v = 0.0;
        for (std::size_t q = 0; q < d.k; ++q) {
          const std::size_t cand = (t * d.stride + q) * d.c + c;
          const double xv = x[n * d.len * d.c + cand];
          if (q == 0 || xv > v) {
            v = xv;
            best = cand;
          }
        }
        y[(n * lo + t) * d.c + c] = v;
        argmax[(n * lo + t) * d.c + c] = best;
      }
}

void maxpool2d_forward(const double* x, double* y, std::size_t* argmax, const Pool2dDims& d) {
  const std::size_t oh = d.out_h(), ow = d.out_w();
  for (std::size_t n = 0; n < d.n; ++n)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j)
        for (std::size_t c = 0; c < d.c; ++c) {
          std::size_t best = 0;
          double v = 0.0;
          bool first = true;
          for (std::size_t a = 0; a < d.k; ++a)
            for (std::size_t bb = 0; bb < d.k; ++bb) {
              const std::size_t cand = ((i * d.stride + a) * d.w + j * d.stride + bb) * d.c + c;
              const double xv = x[n * d.h * d.w * d.c + cand];
              if (first || xv > v) {
                v = xv;
                best = cand;
                first = false;
              }
            }
          const std::size_t o = ((n * oh + i) * ow + j) * d.c + c;
          y[o] = v;
          argmax[o] = best;
        }
}

void maxpool_backward(const double* gy, const std::size_t* argmax, double* gx, std::size_t n, std::size_t in_per_sample,
                      std::size_t out_per_sample) {
  std::fill(gx, gx + n * in_per_sample, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t o = 0; o < out_per_sample; ++o)
      gx[s * in_per_sample + argmax[s * out_per_sample + o]] += gy[s * out_per_sample + o];
}

}  // namespace ref
}  // namespace stressfuse::kernels

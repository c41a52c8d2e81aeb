#pragma once

#include <cstddef>

// Layer kernels over a batch of n samples stored contiguously, sample-major.
// Layouts (row-major):
//   dense   x [n][in]        w [in][out]            y [n][out]
//   conv1d  x [n][len][cin]  w [k][cin][cout]       y [n][len-k+1][cout]
//   conv2d  x [n][h][w][cin] w [kh][kw][cin][cout]  y [n][h-kh+1][w-kw+1][cout]
//   pools   x [n][len][c] / [n][h][w][c], window k, stride s
// Backward kernels overwrite gx, gw and gb; gx may be null.
//
// The top-level functions are OpenMP-parallel: forward and input gradients
// split over samples, weight gradients over weight rows, so every output
// element is reduced in a fixed order and results do not depend on the
// thread count. The ref:: functions are plain serial loops used as oracles.
namespace stressfuse::kernels {

struct DenseDims {
  std::size_t n, in, out;
};
struct Conv1dDims {
  std::size_t n, len, cin, cout, k;
  std::size_t out_len() const { return len - k + 1; }
};
struct Conv2dDims {
  std::size_t n, h, w, cin, cout, kh, kw;
  std::size_t out_h() const { return h - kh + 1; }
  std::size_t out_w() const { return w - kw + 1; }
};
struct Pool1dDims {
  std::size_t n, len, c, k, stride;
  std::size_t out_len() const { return (len - k) / stride + 1; }
};
struct Pool2dDims {
  std::size_t n, h, w, c, k, stride;
  std::size_t out_h() const { return (h - k) / stride + 1; }
  std::size_t out_w() const { return (w - k) / stride + 1; }
};

void dense_forward(const double* x, const double* w, const double* b, double* y, const DenseDims& d);
void dense_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                    const DenseDims& d);

void conv1d_forward(const double* x, const double* w, const double* b, double* y, const Conv1dDims& d);
void conv1d_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                     const Conv1dDims& d);

void conv2d_forward(const double* x, const double* w, const double* b, double* y, const Conv2dDims& d);
void conv2d_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                     const Conv2dDims& d);

// argmax receives, per output element, the flat input index of the maximum
// (first occurrence on ties).
void maxpool1d_forward(const double* x, double* y, std::size_t* argmax, const Pool1dDims& d);
void maxpool2d_forward(const double* x, double* y, std::size_t* argmax, const Pool2dDims& d);
void maxpool_backward(const double* gy, const std::size_t* argmax, double* gx, std::size_t n, std::size_t in_per_sample,
                      std::size_t out_per_sample);

namespace ref {

void dense_forward(const double* x, const double* w, const double* b, double* y, const DenseDims& d);
void dense_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                    const DenseDims& d);
void conv1d_forward(const double* x, const double* w, const double* b, double* y, const Conv1dDims& d);
void conv1d_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                     const Conv1dDims& d);
void conv2d_forward(const double* x, const double* w, const double* b, double* y, const Conv2dDims& d);
void conv2d_backward(const double* x, const double* w, const double* gy, double* gx, double* gw, double* gb,
                     const Conv2dDims& d);
void maxpool1d_forward(const double* x, double* y, std::size_t* argmax, const Pool1dDims& d);
void maxpool2d_forward(const double* x, double* y, std::size_t* argmax, const Pool2dDims& d);
void maxpool_backward(const double* gy, const std::size_t* argmax, double* gx, std::size_t n, std::size_t in_per_sample,
                      std::size_t out_per_sample);

}  // namespace ref
}  // namespace stressfuse::kernels

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stressfuse/common/matrix.hpp"
#include "stressfuse/nn/spec.hpp"
#include "stressfuse/nn/tensor.hpp"

namespace stressfuse::nn {

enum class Exec { kParallel, kReference };

namespace detail {

// One node of the compiled graph: a layer, or the concatenation of branch
// outputs. Buffers 0..branches-1 hold the branch inputs.
struct Op {
  bool concat = false;
  LayerSpec layer;
  Shape in_shape, out_shape;
  std::vector<std::size_t> inputs;  // buffer ids
  std::size_t output = 0;           // buffer id
  std::size_t param_offset = 0;
  std::size_t weight_count = 0;
  std::size_t bias_count = 0;
  std::string label;
};

}  // namespace detail

// A compiled ModelSpec with its parameters in one flat buffer. Each weighted
// layer owns a contiguous slice: weights in the kernel layout, then biases.
// Inference is const and safe to call concurrently.
class Network {
 public:
  explicit Network(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  std::size_t param_count() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t input_width() const { return input_width_; }
  std::size_t num_classes() const { return classes_; }

  // Fan-in scaled uniform weights, U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
  void init(std::uint64_t seed);

  // Rows of x are samples laid out as the branch inputs back to back.
  Matrix logits(const Matrix& x, Exec exec = Exec::kParallel) const;
  Matrix forward(const Matrix& x, Exec exec = Exec::kParallel) const;
  // batch shape [n, input_width] or, for one branch, [n, input_shape...].
  Matrix forward(const Tensor& batch, Exec exec = Exec::kParallel) const;

  // Mean categorical cross-entropy; grad is resized to param_count().
  double loss_and_grads(const Matrix& x, std::span<const int> y, std::vector<double>& grad,
                        Exec exec = Exec::kParallel) const;
  double loss(const Matrix& x, std::span<const int> y, Exec exec = Exec::kParallel) const;

  // Hash of every ReLU sign and max-pool argmax for the batch. Equal
  // fingerprints mean the loss is smooth between the two parameter points.
  std::uint64_t activation_fingerprint(const Matrix& x) const;

  // Per-layer (label, offset, count) parameter slices, in graph order.
  struct Slice {
    std::string label;
    std::size_t offset;
    std::size_t count;
  };
  std::vector<Slice> param_slices() const;

  struct Trace;

 private:
  void run_forward(const Matrix& x, Exec exec, Trace& t) const;
  static Trace& workspace();

  ModelSpec spec_;
  std::vector<detail::Op> ops_;
  std::size_t n_buffers_ = 0;
  std::vector<std::size_t> buffer_width_;
  std::size_t input_width_ = 0;
  std::size_t classes_ = 0;
  std::size_t logits_buffer_ = 0;
  std::vector<double> params_;
};

// Row-wise numerically stable softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace stressfuse::nn

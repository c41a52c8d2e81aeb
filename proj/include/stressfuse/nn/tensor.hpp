#pragma once

#include <vector>

#include "stressfuse/nn/spec.hpp"

namespace stressfuse::nn {

// Dense row-major tensor; shape[0] is the batch dimension where one exists.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)), data(shape_size(shape), fill) {}

  std::size_t size() const { return data.size(); }
  // Throws ShapeError unless data.size() == product(shape) and every dim > 0.
  void validate() const;

  bool operator==(const Tensor&) const = default;
};

}  // namespace stressfuse::nn

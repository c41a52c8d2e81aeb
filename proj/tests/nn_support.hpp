#pragma once

#include <vector>

#include "stressfuse/common/matrix.hpp"
#include "stressfuse/common/rng.hpp"
#include "stressfuse/nn/spec.hpp"

namespace stressfuse::testing {

// Small random layer graphs covering every layer kind: a dense stack, a
// conv1d trunk or a conv2d trunk, each optionally pooled, always ending in a
// softmax head.
inline nn::ModelSpec random_model_spec(Rng& rng) {
  using nn::LayerSpec;
  nn::BranchSpec b;
  switch (rng.below(3)) {
    case 0: {
      b.input_shape = {2 + rng.below(6)};
      const std::size_t depth = 1 + rng.below(2);
      for (std::size_t i = 0; i < depth; ++i) {
        b.layers.push_back(LayerSpec::dense(2 + rng.below(5)));
        b.layers.push_back(LayerSpec::relu());
      }
      break;
    }
    case 1: {
      const std::size_t k = 1 + rng.below(3);
      b.input_shape = {k + 2 + rng.below(6), 1 + rng.below(2)};
      b.layers.push_back(LayerSpec::conv1d(1 + rng.below(3), k));
      b.layers.push_back(LayerSpec::relu());
      if (rng.below(2)) b.layers.push_back(LayerSpec::maxpool1d(2));
      b.layers.push_back(LayerSpec::flatten());
      if (rng.below(2)) {
        b.layers.push_back(LayerSpec::dense(2 + rng.below(4)));
        b.layers.push_back(LayerSpec::relu());
      }
      break;
    }
    default: {
      const std::size_t kh = 1 + rng.below(2), kw = 1 + rng.below(2);
      b.input_shape = {kh + 2 + rng.below(3), kw + 2 + rng.below(3), 1 + rng.below(2)};
      b.layers.push_back(LayerSpec::conv2d(1 + rng.below(3), kh, kw));
      b.layers.push_back(LayerSpec::relu());
      if (rng.below(2)) b.layers.push_back(LayerSpec::maxpool2d(2));
      b.layers.push_back(LayerSpec::flatten());
      break;
    }
  }
  b.layers.push_back(LayerSpec::softmax_head(3));
  nn::ModelSpec spec;
  spec.name = "random";
  spec.branches.push_back(std::move(b));
  return spec;
}

inline Matrix random_batch(Rng& rng, std::size_t n, std::size_t width) {
  Matrix x(n, width);
  for (double& v : x.data) v = rng.normal();
  return x;
}

inline std::vector<int> random_labels(Rng& rng, std::size_t n) {
  std::vector<int> y(n);
  for (int& v : y) v = static_cast<int>(rng.below(3));
  return y;
}

}  // namespace stressfuse::testing

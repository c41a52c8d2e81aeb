#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace stressfuse::nn {

// Per-sample shape, batch dimension excluded. Rank 1 [d], rank 2 [len, ch],
// rank 3 [h, w, ch].
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& s);
std::string shape_string(const Shape& s);

enum class LayerKind { kDense, kConv1d, kConv2d, kRelu, kFlatten, kMaxPool1d, kMaxPool2d, kSoftmaxHead };

// softmax_head(c) is a dense layer to c logits followed by softmax; it must
// end the graph and is where the cross-entropy loss attaches.
struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::size_t units = 0;  // dense/softmax_head outputs, conv output channels
  std::size_t kh = 0;     // conv1d kernel, conv2d kernel height, pool window
  std::size_t kw = 0;     // conv2d kernel width
  std::size_t stride = 1; // pools only

  static LayerSpec dense(std::size_t out);
  static LayerSpec conv1d(std::size_t out_channels, std::size_t kernel);
  static LayerSpec conv2d(std::size_t out_channels, std::size_t kh, std::size_t kw);
  static LayerSpec relu();
  static LayerSpec flatten();
  static LayerSpec maxpool1d(std::size_t k, std::size_t stride = 1);
  static LayerSpec maxpool2d(std::size_t k, std::size_t stride = 1);
  static LayerSpec softmax_head(std::size_t classes = 3);

  // Output shape; throws ShapeError when the input does not fit.
  Shape output_shape(const Shape& in) const;
  std::size_t param_count(const Shape& in) const;
  std::size_t fan_in(const Shape& in) const;
  std::string name() const;

  bool operator==(const LayerSpec&) const = default;
};

struct BranchSpec {
  Shape input_shape;
  std::vector<LayerSpec> layers;
  bool operator==(const BranchSpec&) const = default;
};

// One or more branches reading consecutive column ranges of the input rows.
// With a single branch and no head, the branch is the whole model. With a
// head, every branch must end in a rank-1 output; branch outputs are
// concatenated in order and fed to the head.
struct ModelSpec {
  std::string name;
  std::vector<BranchSpec> branches;
  std::vector<LayerSpec> head;

  std::size_t input_width() const;
  std::size_t num_classes() const;
  // Throws ShapeError or SpecError when the graph is inconsistent.
  void validate() const;

  bool operator==(const ModelSpec&) const = default;
};

// Sum of the per-layer formulas: dense in*out + out, conv1d k*cin*cout + cout,
// conv2d kh*kw*cin*cout + cout, softmax_head in*classes + classes.
std::size_t param_count(const ModelSpec& spec);

void to_json(nlohmann::json& j, const LayerSpec& l);
void from_json(const nlohmann::json& j, LayerSpec& l);
void to_json(nlohmann::json& j, const BranchSpec& b);
void from_json(const nlohmann::json& j, BranchSpec& b);
void to_json(nlohmann::json& j, const ModelSpec& m);
void from_json(const nlohmann::json& j, ModelSpec& m);

}  // namespace stressfuse::nn

#include "stressfuse/nn/spec.hpp"

#include <numeric>

#include "stressfuse/common/error.hpp"

namespace stressfuse::nn {
namespace {

void require(bool ok, const LayerSpec& l, const Shape& in, const std::string& what) {
  if (!ok) throw ShapeError(l.name() + " cannot take input " + shape_string(in) + ": " + what);
}

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kConv1d: return "conv1d";
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kMaxPool1d: return "maxpool1d";
    case LayerKind::kMaxPool2d: return "maxpool2d";
    case LayerKind::kSoftmaxHead: return "softmax_head";
  }
  return "?";
}

LayerKind kind_from(const std::string& s) {
  for (auto k : {LayerKind::kDense, LayerKind::kConv1d, LayerKind::kConv2d, LayerKind::kRelu, LayerKind::kFlatten,
                 LayerKind::kMaxPool1d, LayerKind::kMaxPool2d, LayerKind::kSoftmaxHead})
    if (s == kind_name(k)) return k;
  throw SpecError("unknown layer kind: " + s);
}

Shape chain_output(Shape s, const std::vector<LayerSpec>& layers) {
  for (const auto& l : layers) s = l.output_shape(s);
  return s;
}

}  // namespace

std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

LayerSpec LayerSpec::dense(std::size_t out) { return {LayerKind::kDense, out, 0, 0, 1}; }
LayerSpec LayerSpec::conv1d(std::size_t c, std::size_t k) { return {LayerKind::kConv1d, c, k, 0, 1}; }
LayerSpec LayerSpec::conv2d(std::size_t c, std::size_t kh, std::size_t kw) { return {LayerKind::kConv2d, c, kh, kw, 1}; }
LayerSpec LayerSpec::relu() { return {LayerKind::kRelu, 0, 0, 0, 1}; }
LayerSpec LayerSpec::flatten() { return {LayerKind::kFlatten, 0, 0, 0, 1}; }
LayerSpec LayerSpec::maxpool1d(std::size_t k, std::size_t s) { return {LayerKind::kMaxPool1d, 0, k, 0, s}; }
LayerSpec LayerSpec::maxpool2d(std::size_t k, std::size_t s) { return {LayerKind::kMaxPool2d, 0, k, 0, s}; }
LayerSpec LayerSpec::softmax_head(std::size_t classes) { return {LayerKind::kSoftmaxHead, classes, 0, 0, 1}; }

std::string LayerSpec::name() const {
  std::string n = kind_name(kind);
  switch (kind) {
    case LayerKind::kDense:
    case LayerKind::kSoftmaxHead: return n + "(" + std::to_string(units) + ")";
    case LayerKind::kConv1d: return n + "(" + std::to_string(units) + ",k=" + std::to_string(kh) + ")";
    case LayerKind::kConv2d:
      return n + "(" + std::to_string(units) + "," + std::to_string(kh) + "x" + std::to_string(kw) + ")";
    case LayerKind::kMaxPool1d:
    case LayerKind::kMaxPool2d: return n + "(" + std::to_string(kh) + ",s=" + std::to_string(stride) + ")";
    default: return n;
  }
}

Shape LayerSpec::output_shape(const Shape& in) const {
  for (auto d : in) require(d > 0, *this, in, "zero dimension");
  switch (kind) {
    case LayerKind::kDense:
    case LayerKind::kSoftmaxHead:
      require(units > 0, *this, in, "no outputs");
      require(in.size() == 1, *this, in, "needs rank-1 input (add flatten)");
      return {units};
    case LayerKind::kConv1d:
      require(units > 0 && kh > 0, *this, in, "bad layer dimensions");
      require(in.size() == 2, *this, in, "needs [len, channels] input");
      require(in[0] >= kh, *this, in, "kernel longer than input");
      return {in[0] - kh + 1, units};
    case LayerKind::kConv2d:
      require(units > 0 && kh > 0 && kw > 0, *this, in, "bad layer dimensions");
      require(in.size() == 3, *this, in, "needs [h, w, channels] input");
      require(in[0] >= kh && in[1] >= kw, *this, in, "kernel larger than input");
      return {in[0] - kh + 1, in[1] - kw + 1, units};
    case LayerKind::kRelu: return in;
    case LayerKind::kFlatten: return {shape_size(in)};
    case LayerKind::kMaxPool1d:
      require(kh > 0 && stride > 0, *this, in, "bad pool dimensions");
      require(in.size() == 2 && in[0] >= kh, *this, in, "needs [len >= k, channels] input");
      return {(in[0] - kh) / stride + 1, in[1]};
    case LayerKind::kMaxPool2d:
      require(kh > 0 && stride > 0, *this, in, "bad pool dimensions");
      require(in.size() == 3 && in[0] >= kh && in[1] >= kh, *this, in, "needs [h >= k, w >= k, channels] input");
      return {(in[0] - kh) / stride + 1, (in[1] - kh) / stride + 1, in[2]};
  }
  throw InternalError("unhandled layer kind");
}

std::size_t LayerSpec::param_count(const Shape& in) const {
  switch (kind) {
    case LayerKind::kDense:
    case LayerKind::kSoftmaxHead: return in[0] * units + units;
    case LayerKind::kConv1d: return kh * in[1] * units + units;
    case LayerKind::kConv2d: return kh * kw * in[2] * units + units;
    default: return 0;
  }
}

std::size_t LayerSpec::fan_in(const Shape& in) const {
  switch (kind) {
    case LayerKind::kDense:
    case LayerKind::kSoftmaxHead: return in[0];
    case LayerKind::kConv1d: return kh * in[1];
    case LayerKind::kConv2d: return kh * kw * in[2];
    default: return 0;
  }
}

std::size_t ModelSpec::input_width() const {
  std::size_t w = 0;
  for (const auto& b : branches) w += shape_size(b.input_shape);
  return w;
}

std::size_t ModelSpec::num_classes() const {
  const auto& last = head.empty() ? branches.at(0).layers : head;
  if (last.empty() || last.back().kind != LayerKind::kSoftmaxHead) throw SpecError("model does not end in softmax_head");
  return last.back().units;
}

void ModelSpec::validate() const {
  if (branches.empty()) throw SpecError("model has no branches");
  if (branches.size() > 1 && head.empty()) throw SpecError("multi-branch model needs a head");
  auto check_no_head = [](const std::vector<LayerSpec>& ls, std::size_t upto) {
    for (std::size_t i = 0; i < upto; ++i)
      if (ls[i].kind == LayerKind::kSoftmaxHead) throw SpecError("softmax_head must be the final layer");
  };
  Shape concat{0};
  for (const auto& b : branches) {
    if (b.input_shape.empty() || b.input_shape.size() > 3) throw ShapeError("branch input must have rank 1 to 3");
    const Shape out = chain_output(b.input_shape, b.layers);
    if (head.empty()) {
      check_no_head(b.layers, b.layers.size() ? b.layers.size() - 1 : 0);
    } else {
      check_no_head(b.layers, b.layers.size());
      if (out.size() != 1) throw ShapeError("branch output " + shape_string(out) + " must be rank 1 before concat");
      concat[0] += out[0];
    }
  }
  if (!head.empty()) {
    check_no_head(head, head.size() - 1);
    chain_output(concat, head);
  }
  num_classes();
}

std::size_t param_count(const ModelSpec& spec) {
  spec.validate();
  std::size_t total = 0;
  Shape concat{0};
  for (const auto& b : spec.branches) {
    Shape s = b.input_shape;
    for (const auto& l : b.layers) {
      total += l.param_count(s);
      s = l.output_shape(s);
    }
    if (!spec.head.empty()) concat[0] += s[0];
  }
  Shape s = concat;
  for (const auto& l : spec.head) {
    total += l.param_count(s);
    s = l.output_shape(s);
  }
  return total;
}

void to_json(nlohmann::json& j, const LayerSpec& l) {
  j = {{"kind", kind_name(l.kind)}};
  switch (l.kind) {
    case LayerKind::kDense:
    case LayerKind::kSoftmaxHead: j["units"] = l.units; break;
    case LayerKind::kConv1d: j["units"] = l.units; j["kernel"] = l.kh; break;
    case LayerKind::kConv2d: j["units"] = l.units; j["kh"] = l.kh; j["kw"] = l.kw; break;
    case LayerKind::kMaxPool1d:
    case LayerKind::kMaxPool2d: j["k"] = l.kh; j["stride"] = l.stride; break;
    default: break;
  }
}

void from_json(const nlohmann::json& j, LayerSpec& l) {
  l = LayerSpec{};
  l.kind = kind_from(j.at("kind").get<std::string>());
  switch (l.kind) {
    case LayerKind::kDense: l.units = j.at("units"); break;
    case LayerKind::kSoftmaxHead: l.units = j.value("units", std::size_t{3}); break;
    case LayerKind::kConv1d: l.units = j.at("units"); l.kh = j.at("kernel"); break;
    case LayerKind::kConv2d: l.units = j.at("units"); l.kh = j.at("kh"); l.kw = j.at("kw"); break;
    case LayerKind::kMaxPool1d:
    case LayerKind::kMaxPool2d: l.kh = j.at("k"); l.stride = j.value("stride", std::size_t{1}); break;
    default: break;
  }
}

void to_json(nlohmann::json& j, const BranchSpec& b) { j = {{"input_shape", b.input_shape}, {"layers", b.layers}}; }
void from_json(const nlohmann::json& j, BranchSpec& b) {
  b.input_shape = j.at("input_shape").get<Shape>();
  b.layers = j.at("layers").get<std::vector<LayerSpec>>();
}

void to_json(nlohmann::json& j, const ModelSpec& m) {
  j = {{"name", m.name}, {"branches", m.branches}, {"head", m.head}};
}
void from_json(const nlohmann::json& j, ModelSpec& m) {
  m.name = j.value("name", std::string());
  m.branches = j.at("branches").get<std::vector<BranchSpec>>();
  m.head = j.value("head", std::vector<LayerSpec>{});
}

}  // namespace stressfuse::nn

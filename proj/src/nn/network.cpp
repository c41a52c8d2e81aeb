#include "stressfuse/nn/network.hpp"

#include <algorithm>
#include <cmath>

#include "stressfuse/common/error.hpp"
#include "stressfuse/common/rng.hpp"
#include "stressfuse/kernels/nn_kernels.hpp"

namespace stressfuse::nn {

using detail::Op;

struct Network::Trace {
  std::size_t n = 0;
  std::vector<std::vector<double>> buf;
  std::vector<std::vector<std::size_t>> argmax;  // per op, pools only
  std::vector<std::vector<double>> grad;         // per buffer, backward only
};

void Tensor::validate() const {
  for (auto d : shape)
    if (d == 0) throw ShapeError("tensor has a zero dimension");
  if (data.size() != shape_size(shape)) throw ShapeError("tensor data length does not match its shape");
}

Network::Network(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  classes_ = spec_.num_classes();
  input_width_ = spec_.input_width();
  std::size_t next_buf = spec_.branches.size();
  for (const auto& b : spec_.branches) buffer_width_.push_back(shape_size(b.input_shape));
  std::size_t offset = 0;

  auto add_layer = [&](const LayerSpec& l, const Shape& in, std::size_t in_buf, const std::string& scope,
                       std::size_t index) {
    Op op;
    op.layer = l;
    op.in_shape = in;
    op.out_shape = l.output_shape(in);
    op.inputs = {in_buf};
    op.output = next_buf++;
    buffer_width_.push_back(shape_size(op.out_shape));
    const std::size_t np = l.param_count(in);
    op.bias_count = np ? l.units : 0;
    op.weight_count = np - op.bias_count;
    op.param_offset = offset;
    offset += np;
    op.label = scope + "/" + std::to_string(index) + ":" + l.name();
    ops_.push_back(op);
    return ops_.back().output;
  };

  std::vector<std::size_t> branch_out;
  std::size_t concat_width = 0;
  for (std::size_t bi = 0; bi < spec_.branches.size(); ++bi) {
    const auto& b = spec_.branches[bi];
    Shape s = b.input_shape;
    std::size_t buf = bi;
    for (std::size_t li = 0; li < b.layers.size(); ++li) {
      buf = add_layer(b.layers[li], s, buf, "branch" + std::to_string(bi), li);
      s = ops_.back().out_shape;
    }
    branch_out.push_back(buf);
    concat_width += shape_size(s);
  }
  if (!spec_.head.empty()) {
    Op cat;
    cat.concat = true;
    cat.inputs = branch_out;
    cat.out_shape = {concat_width};
    cat.output = next_buf++;
    cat.label = "concat";
    buffer_width_.push_back(concat_width);
    ops_.push_back(cat);
    Shape s = cat.out_shape;
    std::size_t buf = cat.output;
    for (std::size_t li = 0; li < spec_.head.size(); ++li) {
      buf = add_layer(spec_.head[li], s, buf, "head", li);
      s = ops_.back().out_shape;
    }
  }
  n_buffers_ = next_buf;
  logits_buffer_ = ops_.back().output;
  params_.assign(offset, 0.0);
}

void Network::init(std::uint64_t seed) {
  const Rng root = Rng(seed).split("init");
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const Op& op = ops_[i];
    if (op.concat || op.weight_count == 0) continue;
    Rng rng = root.split(i);
    const double a = std::sqrt(6.0 / static_cast<double>(op.layer.fan_in(op.in_shape)));
    double* w = params_.data() + op.param_offset;
    for (std::size_t k = 0; k < op.weight_count; ++k) w[k] = rng.uniform(-a, a);
    std::fill(w + op.weight_count, w + op.weight_count + op.bias_count, 0.0);
  }
}

std::vector<Network::Slice> Network::param_slices() const {
  std::vector<Slice> out;
  for (const auto& op : ops_)
    if (!op.concat && op.weight_count + op.bias_count > 0)
      out.push_back({op.label, op.param_offset, op.weight_count + op.bias_count});
  return out;
}

void Network::run_forward(const Matrix& x, Exec exec, Trace& t) const {
  if (x.cols != input_width_)
    throw ShapeError("input has " + std::to_string(x.cols) + " columns, model expects " + std::to_string(input_width_));
  const std::size_t n = x.rows;
  t.n = n;
  t.buf.resize(std::max(t.buf.size(), n_buffers_));
  t.argmax.resize(std::max(t.argmax.size(), ops_.size()));
  std::size_t col = 0;
  for (std::size_t b = 0; b < spec_.branches.size(); ++b) {
    const std::size_t w = buffer_width_[b];
    auto& dst = t.buf[b];
    dst.resize(n * w);
    for (std::size_t r = 0; r < n; ++r) std::copy_n(&x.data[r * x.cols + col], w, &dst[r * w]);
    col += w;
  }
  const bool ref = exec == Exec::kReference;

  for (std::size_t oi = 0; oi < ops_.size(); ++oi) {
    const Op& op = ops_[oi];
    auto& out = t.buf[op.output];
    out.resize(n * buffer_width_[op.output]);
    if (op.concat) {
      std::size_t off = 0;
      for (auto in_id : op.inputs) {
        const std::size_t w = buffer_width_[in_id];
        for (std::size_t r = 0; r < n; ++r)
          std::copy_n(&t.buf[in_id][r * w], w, &out[r * buffer_width_[op.output] + off]);
        off += w;
      }
      continue;
    }
    const double* in = t.buf[op.inputs[0]].data();
    const double* w = params_.data() + op.param_offset;
    const double* bias = w + op.weight_count;
    const Shape& s = op.in_shape;
    const LayerSpec& l = op.layer;
    switch (l.kind) {
      case LayerKind::kDense:
      case LayerKind::kSoftmaxHead: {
        kernels::DenseDims d{n, s[0], l.units};
        ref ? kernels::ref::dense_forward(in, w, bias, out.data(), d) : kernels::dense_forward(in, w, bias, out.data(), d);
        break;
      }
      case LayerKind::kConv1d: {
        kernels::Conv1dDims d{n, s[0], s[1], l.units, l.kh};
        ref ? kernels::ref::conv1d_forward(in, w, bias, out.data(), d)
            : kernels::conv1d_forward(in, w, bias, out.data(), d);
        break;
      }
      case LayerKind::kConv2d: {
        kernels::Conv2dDims d{n, s[0], s[1], s[2], l.units, l.kh, l.kw};
        ref ? kernels::ref::conv2d_forward(in, w, bias, out.data(), d)
            : kernels::conv2d_forward(in, w, bias, out.data(), d);
        break;
      }
      case LayerKind::kRelu:
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
        break;
      case LayerKind::kFlatten: std::copy_n(in, out.size(), out.data()); break;
      case LayerKind::kMaxPool1d: {
        kernels::Pool1dDims d{n, s[0], s[1], l.kh, l.stride};
        t.argmax[oi].resize(out.size());
        ref ? kernels::ref::maxpool1d_forward(in, out.data(), t.argmax[oi].data(), d)
            : kernels::maxpool1d_forward(in, out.data(), t.argmax[oi].data(), d);
        break;
      }
      case LayerKind::kMaxPool2d: {
        kernels::Pool2dDims d{n, s[0], s[1], s[2], l.kh, l.stride};
        t.argmax[oi].resize(out.size());
        ref ? kernels::ref::maxpool2d_forward(in, out.data(), t.argmax[oi].data(), d)
            : kernels::maxpool2d_forward(in, out.data(), t.argmax[oi].data(), d);
        break;
      }
    }
    // v - v is 0 for finite v and NaN otherwise; the integer OR vectorizes.
    unsigned bad = 0;
    for (double v : out) bad |= static_cast<unsigned>(!(v - v == 0.0));
    if (bad) throw NumericError("non-finite activation in layer " + op.label);
  }
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows, logits.cols);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    const auto z = logits.row(r);
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (std::size_t c = 0; c < logits.cols; ++c) s += (p(r, c) = std::exp(z[c] - m));
    for (std::size_t c = 0; c < logits.cols; ++c) p(r, c) /= s;
  }
  return p;
}

// Activation buffers are reused per thread; sizes of a few MB would
// otherwise be mapped and unmapped on every call.
Network::Trace& Network::workspace() {
  thread_local Trace t;
  return t;
}

Matrix Network::logits(const Matrix& x, Exec exec) const {
  Trace& t = workspace();
  run_forward(x, exec, t);
  Matrix z(x.rows, classes_);
  std::copy(t.buf[logits_buffer_].begin(), t.buf[logits_buffer_].end(), z.data.begin());
  return z;
}

Matrix Network::forward(const Matrix& x, Exec exec) const { return softmax_rows(logits(x, exec)); }

Matrix Network::forward(const Tensor& batch, Exec exec) const {
  batch.validate();
  if (batch.shape.empty()) throw ShapeError("batch tensor needs a batch dimension");
  const std::size_t n = batch.shape[0];
  Shape rest(batch.shape.begin() + 1, batch.shape.end());
  const bool flat = rest.size() == 1 && rest[0] == input_width_;
  const bool native = spec_.branches.size() == 1 && rest == spec_.branches[0].input_shape;
  if (!flat && !native)
    throw ShapeError("batch shape " + shape_string(batch.shape) + " does not match model input");
  Matrix x(n, input_width_);
  x.data = batch.data;
  return forward(x, exec);
}

double Network::loss(const Matrix& x, std::span<const int> y, Exec exec) const {
  if (y.size() != x.rows) throw ShapeError("label count does not match batch size");
  const Matrix z = logits(x, exec);
  double total = 0.0;
  for (std::size_t r = 0; r < z.rows; ++r) {
    const auto row = z.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - m);
    total += std::log(s) + m - row[static_cast<std::size_t>(y[r])];
  }
  return total / static_cast<double>(z.rows);
}

double Network::loss_and_grads(const Matrix& x, std::span<const int> y, std::vector<double>& grad, Exec exec) const {
  if (y.size() != x.rows) throw ShapeError("label count does not match batch size");
  if (x.rows == 0) throw ShapeError("empty batch");
  for (int l : y)
    if (l < 0 || static_cast<std::size_t>(l) >= classes_) throw LabelError("label outside the class range");
  Trace& t = workspace();
  run_forward(x, exec, t);
  const std::size_t n = x.rows;
  const double nd = static_cast<double>(n);

  auto& g = t.grad;
  g.resize(std::max(g.size(), n_buffers_));
  auto& gz = g[logits_buffer_];
  gz.resize(n * classes_);
  const auto& z = t.buf[logits_buffer_];
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double* zr = &z[r * classes_];
    const double m = *std::max_element(zr, zr + classes_);
    double s = 0.0;
    for (std::size_t c = 0; c < classes_; ++c) s += std::exp(zr[c] - m);
    const auto yr = static_cast<std::size_t>(y[r]);
    loss += std::log(s) + m - zr[yr];
    for (std::size_t c = 0; c < classes_; ++c)
      gz[r * classes_ + c] = (std::exp(zr[c] - m) / s - (c == yr ? 1.0 : 0.0)) / nd;
  }
  if (!std::isfinite(loss)) throw NumericError("non-finite loss");

  grad.assign(params_.size(), 0.0);
  const bool ref = exec == Exec::kReference;
  const std::size_t n_inputs = spec_.branches.size();
  for (std::size_t oi = ops_.size(); oi-- > 0;) {
    const Op& op = ops_[oi];
    const auto& gy = g[op.output];
    if (op.concat) {
      const std::size_t wout = buffer_width_[op.output];
      std::size_t off = 0;
      for (auto in_id : op.inputs) {
        const std::size_t w = buffer_width_[in_id];
        auto& gi = g[in_id];
        gi.resize(n * w);
        for (std::size_t r = 0; r < n; ++r) std::copy_n(&gy[r * wout + off], w, &gi[r * w]);
        off += w;
      }
      continue;
    }
    const std::size_t in_id = op.inputs[0];
    const bool need_gx = in_id >= n_inputs;
    auto& gx = g[in_id];
    if (need_gx) gx.resize(n * buffer_width_[in_id]);
    double* gxp = need_gx ? gx.data() : nullptr;
    const double* in = t.buf[in_id].data();
    const double* w = params_.data() + op.param_offset;
    double* gw = grad.data() + op.param_offset;
    double* gb = gw + op.weight_count;
    const Shape& s = op.in_shape;
    const LayerSpec& l = op.layer;
    switch (l.kind) {
      case LayerKind::kDense:
      case LayerKind::kSoftmaxHead: {
        kernels::DenseDims d{n, s[0], l.units};
        ref ? kernels::ref::dense_backward(in, w, gy.data(), gxp, gw, gb, d)
            : kernels::dense_backward(in, w, gy.data(), gxp, gw, gb, d);
        break;
      }
      case LayerKind::kConv1d: {
        kernels::Conv1dDims d{n, s[0], s[1], l.units, l.kh};
        ref ? kernels::ref::conv1d_backward(in, w, gy.data(), gxp, gw, gb, d)
            : kernels::conv1d_backward(in, w, gy.data(), gxp, gw, gb, d);
        break;
      }
      case LayerKind::kConv2d: {
        kernels::Conv2dDims d{n, s[0], s[1], s[2], l.units, l.kh, l.kw};
        ref ? kernels::ref::conv2d_backward(in, w, gy.data(), gxp, gw, gb, d)
            : kernels::conv2d_backward(in, w, gy.data(), gxp, gw, gb, d);
        break;
      }
      case LayerKind::kRelu:
        if (gxp)
          for (std::size_t i = 0; i < gx.size(); ++i) gxp[i] = in[i] > 0.0 ? gy[i] : 0.0;
        break;
      case LayerKind::kFlatten:
        if (gxp) std::copy(gy.begin(), gy.end(), gxp);
        break;
      case LayerKind::kMaxPool1d:
      case LayerKind::kMaxPool2d:
        if (gxp) {
          const std::size_t win = buffer_width_[in_id], wout = buffer_width_[op.output];
          ref ? kernels::ref::maxpool_backward(gy.data(), t.argmax[oi].data(), gxp, n, win, wout)
              : kernels::maxpool_backward(gy.data(), t.argmax[oi].data(), gxp, n, win, wout);
        }
        break;
    }
  }
  return loss / nd;
}

std::uint64_t Network::activation_fingerprint(const Matrix& x) const {
  Trace& t = workspace();
  run_forward(x, Exec::kReference, t);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    h ^= v;
    h *= 0x100000001b3ULL;
  };
  for (std::size_t oi = 0; oi < ops_.size(); ++oi) {
    const Op& op = ops_[oi];
    if (op.concat) continue;
    if (op.layer.kind == LayerKind::kRelu)
      for (double v : t.buf[op.inputs[0]]) mix(v > 0.0 ? 1 : 0);
    for (auto a : t.argmax[oi]) mix(a);
  }
  return h;
}

}  // namespace stressfuse::nn

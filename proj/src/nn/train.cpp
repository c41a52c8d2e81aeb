#include "stressfuse/nn/train.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "stressfuse/common/error.hpp"
#include "stressfuse/common/rng.hpp"
#include "stressfuse/sigcore/csv.hpp"

namespace stressfuse::nn {

void TrainConfig::validate() const {
  if (epochs < 1) throw SpecError("epochs must be >= 1");
  if (batch_size < 1) throw SpecError("batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw SpecError("learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw SpecError("Adam betas must be in [0, 1)");
  if (!(epsilon > 0.0)) throw SpecError("epsilon must be positive");
  if (patience < 0) throw SpecError("patience must be >= 0");
}

TrainResult train(const ModelSpec& spec, const Matrix& x, std::span<const int> y, const TrainConfig& cfg) {
  cfg.validate();
  if (x.rows == 0) throw EmptyMatrixError("no training rows");
  if (y.size() != x.rows) throw ShapeError("label count does not match row count");
  TrainResult res{Network(spec), {}, false};
  Network& net = res.model;
  net.init(cfg.seed);
  const std::size_t p = net.param_count();
  std::vector<double> m(p, 0.0), v(p, 0.0), grad;
  const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), x.rows);
  const Rng shuffle_root = Rng(cfg.seed).split("shuffle");

  std::vector<std::size_t> order(x.rows);
  Matrix xb;
  std::vector<int> yb;
  double best = std::numeric_limits<double>::infinity();
  int wait = 0;
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng = shuffle_root.split(static_cast<std::uint64_t>(epoch));
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < x.rows; start += bs) {
      const std::size_t end = std::min(start + bs, x.rows);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      xb = x.select_rows(idx);
      yb.clear();
      for (auto i : idx) yb.push_back(y[i]);
      double loss = 0.0;
      try {
        loss = net.loss_and_grads(xb, yb, grad, cfg.exec);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ", batch starting at row " +
                           std::to_string(start) + ")");
      }
      epoch_loss += loss * static_cast<double>(idx.size());
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      auto& w = net.params();
      for (std::size_t k = 0; k < p; ++k) {
        m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
        v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
        w[k] -= cfg.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.epsilon);
      }
    }
    epoch_loss /= static_cast<double>(x.rows);
    if (!std::isfinite(epoch_loss)) throw NumericError("training loss became non-finite at epoch " + std::to_string(epoch));
    res.loss_curve.push_back(epoch_loss);
    if (cfg.patience > 0) {
      if (epoch_loss < best - cfg.min_delta) {
        best = epoch_loss;
        wait = 0;
      } else if (++wait >= cfg.patience) {
        res.early_stopped = true;
        break;
      }
    }
  }
  return res;
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"epochs", c.epochs},         {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
       {"beta1", c.beta1},           {"beta2", c.beta2},           {"epsilon", c.epsilon},
       {"seed", c.seed},             {"patience", c.patience},     {"min_delta", c.min_delta}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c = TrainConfig{};
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.seed = j.value("seed", c.seed);
  c.patience = j.value("patience", c.patience);
  c.min_delta = j.value("min_delta", c.min_delta);
}

namespace {

constexpr const char* kModelFormat = "stressfuse-model";

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

}  // namespace

void save_model(const std::filesystem::path& path, const Network& net, std::uint64_t seed) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const nlohmann::json header = {{"format", kModelFormat},
                                 {"version", 1},
                                 {"spec", net.spec()},
                                 {"seed", seed},
                                 {"param_count", net.param_count()}};
  out << header.dump() << '\n';
  for (double d : net.params()) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Network load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + " has no header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad model header: " + e.what());
  }
  if (header.value("format", "") != kModelFormat) throw FormatError(path.string() + " is not a model file");
  Network net(header.at("spec").get<ModelSpec>());
  if (header.at("param_count").get<std::size_t>() != net.param_count())
    throw FormatError(path.string() + ": parameter count does not match the spec");
  for (double& d : net.params()) {
    std::uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw FormatError(path.string() + " is truncated");
    d = std::bit_cast<double>(to_little(bits));
  }
  return net;
}

void write_loss_curve(const std::filesystem::path& path, std::span<const double> curve) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < curve.size(); ++e) out << e << ',' << sigcore::format_double(curve[e]) << '\n';
}

GradCheckResult gradient_check(Network& net, const Matrix& x, std::span<const int> y, double h, double floor,
                               Exec exec) {
  GradCheckResult res;
  std::vector<double> grad;
  net.loss_and_grads(x, y, grad, exec);
  const std::uint64_t base = net.activation_fingerprint(x);
  auto& w = net.params();
  const auto slices = net.param_slices();
  for (const auto& s : slices) {
    for (std::size_t k = s.offset; k < s.offset + s.count; ++k) {
      const double orig = w[k];
      w[k] = orig + h;
      const double lp = net.loss(x, y, exec);
      const bool smooth_p = net.activation_fingerprint(x) == base;
      w[k] = orig - h;
      const double lm = net.loss(x, y, exec);
      const bool smooth_m = net.activation_fingerprint(x) == base;
      w[k] = orig;
      if (!smooth_p || !smooth_m) {
        ++res.skipped;
        continue;
      }
      const double fd = (lp - lm) / (2.0 * h);
      const double err = std::abs(grad[k] - fd) / std::max({std::abs(grad[k]), std::abs(fd), floor});
      ++res.checked;
      if (err > res.max_rel_error) {
        res.max_rel_error = err;
        res.worst_layer = s.label;
      }
    }
  }
  return res;
}

}  // namespace stressfuse::nn

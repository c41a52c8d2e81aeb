#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "stressfuse/common/matrix.hpp"
#include "stressfuse/nn/network.hpp"

namespace stressfuse::nn {

struct TrainConfig {
  int epochs = 60;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;  // initialization and shuffling
  int patience = 10;       // epochs without training-loss improvement; 0 disables
  double min_delta = 0.0;
  Exec exec = Exec::kParallel;

  void validate() const;
};

struct TrainResult {
  Network model;
  std::vector<double> loss_curve;  // mean training loss per epoch
  bool early_stopped = false;
};

// Adam with bias correction over shuffled minibatches (the batch is clipped
// to the row count). Deterministic given the config seed.
TrainResult train(const ModelSpec& spec, const Matrix& x, std::span<const int> y, const TrainConfig& cfg);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// One JSON header line, then param_count little-endian 64-bit floats.
void save_model(const std::filesystem::path& path, const Network& net, std::uint64_t seed = 0);
Network load_model(const std::filesystem::path& path);

void write_loss_curve(const std::filesystem::path& path, std::span<const double> curve);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates where a ReLU or pool switched within +-h
  std::string worst_layer;
};

// Compares loss_and_grads against central differences on every parameter.
// Relative error is |a - f| / max(|a|, |f|, floor).
GradCheckResult gradient_check(Network& net, const Matrix& x, std::span<const int> y, double h = 1e-5,
                               double floor = 1e-6, Exec exec = Exec::kParallel);

}  // namespace stressfuse::nn

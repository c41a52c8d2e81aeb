#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stressfuse/common/matrix.hpp"
#include "stressfuse/featex/manifest.hpp"
#include "stressfuse/nn/network.hpp"
#include "stressfuse/nn/spec.hpp"

namespace stressfuse::fusion {

enum class Family { kMultivariate, kEarly, kLateDecision, kLateConcat };
enum class ModelKind { kCnn1d, kCnn2d, kFcdnn };

std::string_view family_name(Family f);
std::string_view kind_name(ModelKind k);
Family family_from(std::string_view s);
ModelKind kind_from(std::string_view s);

// Layer sizes of the three trunk architectures:
//   cnn1d: conv1d(conv1d_channels, k) > relu > maxpool1d(pool) > flatten > dense(hidden) > relu
//   cnn2d: conv2d(conv2d_channels, k x k) > relu > maxpool2d(pool) > flatten > dense(hidden) > relu
//   fcdnn: dense(fc_hidden) > relu > dense(hidden) > relu
// A softmax_head(3) completes a trunk into a model; late concatenation
// instead joins two trunks under dense(hidden) > relu > softmax_head(3).
struct Architecture {
  std::size_t conv1d_channels = 32;
  std::size_t conv1d_kernel = 3;
  std::size_t conv2d_channels = 16;
  std::size_t conv2d_kernel = 3;
  std::size_t pool = 2;
  std::size_t pool_stride = 1;
  std::size_t fc_hidden = 128;
  std::size_t hidden = 64;
  std::size_t classes = 3;
  // Feature count -> (rows, cols) for 2D inputs, filled row-major in
  // selection rank order.
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> grids = {{30, {5, 6}}, {100, {10, 10}}};

  std::pair<std::size_t, std::size_t> grid(std::size_t k) const;
};

// Trunk over k features, ending in the dense(hidden) > relu representation.
nn::BranchSpec build_trunk(ModelKind kind, std::size_t k, const Architecture& arch = {});

nn::ModelSpec build_multivariate(ModelKind kind, featex::Modality modality, std::size_t k,
                                 const Architecture& arch = {});
nn::ModelSpec build_early(ModelKind kind, std::size_t k_fused, const Architecture& arch = {});
// Input rows are [bio features | landmark features].
nn::ModelSpec build_late_concat(const nn::BranchSpec& trunk_bio, const nn::BranchSpec& trunk_lnd,
                                const Architecture& arch = {});

struct Prediction {
  Matrix probabilities;
  std::vector<int> labels;
};

// Argmax per row; ties go to the lowest class index.
std::vector<int> argmax_rows(const Matrix& p);

// Elementwise mean of two probability matrices. Rows must each sum to 1.
Matrix average_probabilities(const Matrix& p_bio, const Matrix& p_lnd);

Prediction predict(const nn::Network& model, const Matrix& x);
Prediction predict_late_decision(const nn::Network& model_bio, const nn::Network& model_lnd, const Matrix& x_bio,
                                 const Matrix& x_lnd);

// One of the eleven model/data combinations (six multivariate, three early,
// two late).
struct FusionSpec {
  Family family = Family::kEarly;
  ModelKind kind = ModelKind::kCnn1d;            // multivariate and early
  featex::Modality modality = featex::Modality::kBio;  // multivariate
  ModelKind bio_kind = ModelKind::kCnn1d;        // late families
  ModelKind lnd_kind = ModelKind::kCnn2d;        // late families
  Architecture arch;

  std::string label() const;  // e.g. "multivariate-cnn2d-lnd", "late_decision"
  void validate() const;
};

std::vector<FusionSpec> paper_combinations();

void to_json(nlohmann::json& j, const Architecture& a);
void from_json(const nlohmann::json& j, Architecture& a);
void to_json(nlohmann::json& j, const FusionSpec& f);
void from_json(const nlohmann::json& j, FusionSpec& f);

}  // namespace stressfuse::fusion

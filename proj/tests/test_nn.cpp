#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nn_support.hpp"
#include "stressfuse/common/error.hpp"
#include "stressfuse/fusion/fusion.hpp"
#include "stressfuse/nn/network.hpp"
#include "stressfuse/nn/train.hpp"
#include "support.hpp"

using namespace stressfuse;
using namespace stressfuse::nn;

namespace {

ModelSpec single(Shape in, std::vector<LayerSpec> layers) {
  ModelSpec s;
  s.name = "t";
  s.branches.push_back({std::move(in), std::move(layers)});
  return s;
}

// conv1d(c, k) > relu > maxpool1d(2) > flatten > softmax_head(3), written out
// loop by loop against the documented parameter layout.
Matrix conv1d_oracle(const std::vector<double>& p, const Matrix& x, std::size_t len, std::size_t c, std::size_t k) {
  const double* w = p.data();
  const double* b = w + k * c;
  const std::size_t conv_len = len - k + 1, pool_len = conv_len - 1, flat = pool_len * c;
  const double* hw = b + c;
  const double* hb = hw + flat * 3;
  Matrix out(x.rows, 3);
  for (std::size_t r = 0; r < x.rows; ++r) {
    std::vector<double> conv(conv_len * c);
    for (std::size_t t = 0; t < conv_len; ++t)
      for (std::size_t o = 0; o < c; ++o) {
        double s = b[o];
        for (std::size_t j = 0; j < k; ++j) s += x(r, t + j) * w[j * c + o];
        conv[t * c + o] = std::max(0.0, s);
      }
    std::vector<double> flat_v(flat);
    for (std::size_t t = 0; t < pool_len; ++t)
      for (std::size_t o = 0; o < c; ++o) flat_v[t * c + o] = std::max(conv[t * c + o], conv[(t + 1) * c + o]);
    double z[3], zmax = -1e300, sum = 0;
    for (int q = 0; q < 3; ++q) {
      z[q] = hb[q];
      for (std::size_t i = 0; i < flat; ++i) z[q] += flat_v[i] * hw[i * 3 + q];
      zmax = std::max(zmax, z[q]);
    }
    for (int q = 0; q < 3; ++q) sum += std::exp(z[q] - zmax);
    for (int q = 0; q < 3; ++q) out(r, q) = std::exp(z[q] - zmax) / sum;
  }
  return out;
}

// Three well separated Gaussian blobs in the plane.
void blobs(Rng& rng, std::size_t per_class, double noise, Matrix& x, std::vector<int>& y) {
  const double cx[] = {-3, 3, 0}, cy[] = {0, 0, 4};
  x = Matrix(3 * per_class, 2);
  y.assign(3 * per_class, 0);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const int c = static_cast<int>(i % 3);
    y[i] = c;
    x(i, 0) = cx[c] + noise * rng.normal();
    x(i, 1) = cy[c] + noise * rng.normal();
  }
}

}  // namespace

TEST(Nn, ForwardMatchesLoopOracle) {
  Rng rng(21);
  const auto spec = single({12, 1}, {LayerSpec::conv1d(4, 3), LayerSpec::relu(), LayerSpec::maxpool1d(2),
                                     LayerSpec::flatten(), LayerSpec::softmax_head(3)});
  Network net(spec);
  net.init(5);
  for (double& v : net.params()) v += 0.1 * rng.normal();
  const Matrix x = stressfuse::testing::random_batch(rng, 9, 12);
  const Matrix expect = conv1d_oracle(net.params(), x, 12, 4, 3);
  for (Exec e : {Exec::kParallel, Exec::kReference}) {
    const Matrix got = net.forward(x, e);
    for (std::size_t i = 0; i < got.data.size(); ++i) EXPECT_NEAR(got.data[i], expect.data[i], 1e-10);
  }
}

TEST(Nn, ZeroWeightsGiveUniform) {
  Network net(single({5}, {LayerSpec::dense(4), LayerSpec::relu(), LayerSpec::softmax_head(3)}));
  std::fill(net.params().begin(), net.params().end(), 0.0);
  Rng rng(1);
  const Matrix p = net.forward(stressfuse::testing::random_batch(rng, 4, 5));
  for (double v : p.data) EXPECT_DOUBLE_EQ(v, 1.0 / 3);
}

TEST(Nn, SoftmaxOfEqualLogits) {
  const Matrix p = softmax_rows(Matrix(1, 3, 1.0));
  for (double v : p.data) EXPECT_DOUBLE_EQ(v, 1.0 / 3);
}

TEST(Nn, SoftmaxRowsSumToOneAndShiftInvariant) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    Matrix z(1, 3);
    for (double& v : z.data) v = rng.normal(0, 50);
    const Matrix p = softmax_rows(z);
    EXPECT_NEAR(p.data[0] + p.data[1] + p.data[2], 1.0, 1e-9);
    Matrix zs = z;
    const double c = rng.normal(0, 100);
    for (double& v : zs.data) v += c;
    const Matrix ps = softmax_rows(zs);
    for (int q = 0; q < 3; ++q) EXPECT_NEAR(p.data[q], ps.data[q], 1e-12);
  }
}

TEST(Nn, ForwardShapeMismatch) {
  Network net(single({5}, {LayerSpec::softmax_head(3)}));
  EXPECT_THROW(net.forward(Matrix(2, 4)), ShapeError);
  Tensor t({2, 6});
  EXPECT_THROW(net.forward(t), ShapeError);
}

TEST(Nn, UniformPredictionLossIsLn3) {
  Network net(single({4}, {LayerSpec::softmax_head(3)}));
  std::fill(net.params().begin(), net.params().end(), 0.0);
  Rng rng(2);
  const Matrix x = stressfuse::testing::random_batch(rng, 6, 4);
  EXPECT_NEAR(net.loss(x, stressfuse::testing::random_labels(rng, 6)), std::log(3.0), 1e-15);
}

TEST(Nn, ConfidentCorrectPredictionLossNearZero) {
  Network net(single({3}, {LayerSpec::softmax_head(3)}));
  auto& p = net.params();
  std::fill(p.begin(), p.end(), 0.0);
  for (int i = 0; i < 3; ++i) p[i * 3 + i] = 60.0;
  Matrix x(3, 3);
  for (int i = 0; i < 3; ++i) x(i, i) = 1.0;
  EXPECT_LT(net.loss(x, std::vector<int>{0, 1, 2}), 1e-20);
}

TEST(Nn, LabelOutOfRange) {
  Network net(single({2}, {LayerSpec::softmax_head(3)}));
  std::vector<double> g;
  EXPECT_THROW(net.loss_and_grads(Matrix(1, 2), std::vector<int>{3}, g), LabelError);
}

TEST(Nn, NonFiniteActivationNamesTheLayer) {
  Network net(single({2}, {LayerSpec::dense(3), LayerSpec::relu(), LayerSpec::softmax_head(3)}));
  std::fill(net.params().begin(), net.params().end(), 1e300);
  Matrix x(1, 2, 1e300);
  try {
    net.forward(x);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("dense"), std::string::npos) << e.what();
  }
}

TEST(Nn, GradientCheckRandomSpecs) {
  Rng rng(2024);
  for (int t = 0; t < 25; ++t) {
    const auto spec = stressfuse::testing::random_model_spec(rng);
    Network net(spec);
    net.init(rng.next_u64());
    const Matrix x = stressfuse::testing::random_batch(rng, 4, net.input_width());
    const auto y = stressfuse::testing::random_labels(rng, 4);
    const auto r = gradient_check(net, x, y);
    EXPECT_LT(r.max_rel_error, 1e-4) << "spec " << t << " worst " << r.worst_layer;
    EXPECT_GT(r.checked, r.skipped);
  }
}

TEST(Nn, GradientCheckTwoBranchGraph) {
  fusion::Architecture arch;
  arch.conv1d_channels = 3;
  arch.conv2d_channels = 2;
  arch.hidden = 4;
  arch.grids = {{20, {4, 5}}};
  const auto spec = fusion::build_late_concat(fusion::build_trunk(fusion::ModelKind::kCnn1d, 6, arch),
                                              fusion::build_trunk(fusion::ModelKind::kCnn2d, 20, arch), arch);
  Network net(spec);
  net.init(3);
  Rng rng(8);
  const Matrix x = stressfuse::testing::random_batch(rng, 5, 26);
  const auto r = gradient_check(net, x, stressfuse::testing::random_labels(rng, 5));
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_layer;
}

TEST(Nn, ReferenceAndParallelGradientsAgree) {
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    Network net(stressfuse::testing::random_model_spec(rng));
    net.init(t);
    const Matrix x = stressfuse::testing::random_batch(rng, 7, net.input_width());
    const auto y = stressfuse::testing::random_labels(rng, 7);
    std::vector<double> ga, gb;
    const double la = net.loss_and_grads(x, y, ga, Exec::kParallel);
    const double lb = net.loss_and_grads(x, y, gb, Exec::kReference);
    EXPECT_NEAR(la, lb, 1e-12);
    for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_NEAR(ga[i], gb[i], 1e-12 * std::max(1.0, std::abs(gb[i])));
  }
}

TEST(Nn, ParamCountFormulas) {
  EXPECT_EQ(LayerSpec::dense(64).param_count({100}), 6464u);
  EXPECT_EQ(LayerSpec::conv1d(32, 3).param_count({100, 1}), 128u);
  EXPECT_EQ(LayerSpec::conv2d(16, 3, 3).param_count({10, 10, 1}), 160u);
  EXPECT_EQ(LayerSpec::relu().param_count({7}), 0u);
  EXPECT_EQ(LayerSpec::maxpool1d(2).param_count({7, 2}), 0u);
}

// Independent recount of the default early-fusion 1D-CNN over 100 features.
TEST(Nn, EarlyCnn1dParamRecount) {
  const std::size_t conv = 3 * 1 * 32 + 32;          // k * cin * cout + cout
  const std::size_t flat = (100 - 3 + 1 - 2 + 1) * 32;  // valid conv, pool 2 stride 1
  const std::size_t dense = flat * 64 + 64;
  const std::size_t head = 64 * 3 + 3;
  const auto spec = fusion::build_early(fusion::ModelKind::kCnn1d, 100);
  EXPECT_EQ(param_count(spec), conv + dense + head);
  EXPECT_EQ(Network(spec).param_count(), conv + dense + head);
}

TEST(Nn, InconsistentSpecIsShapeError) {
  EXPECT_THROW(single({5}, {LayerSpec::conv1d(2, 3), LayerSpec::softmax_head(3)}).validate(), ShapeError);
  EXPECT_THROW(single({2, 1}, {LayerSpec::conv1d(2, 3), LayerSpec::softmax_head(3)}).validate(), ShapeError);
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  Rng rng(4);
  Matrix x;
  std::vector<int> y;
  blobs(rng, 20, 0.5, x, y);
  const auto spec = single({2}, {LayerSpec::dense(8), LayerSpec::relu(), LayerSpec::softmax_head(3)});
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 0.0;
  cfg.seed = 9;
  Network init(spec);
  init.init(9);
  EXPECT_EQ(train(spec, x, y, cfg).model.params(), init.params());
}

TEST(Train, SameSeedIsBitwiseIdentical) {
  Rng rng(5);
  Matrix x;
  std::vector<int> y;
  blobs(rng, 30, 1.0, x, y);
  const auto spec = single({2}, {LayerSpec::dense(8), LayerSpec::relu(), LayerSpec::softmax_head(3)});
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto a = train(spec, x, y, cfg);
  const auto b = train(spec, x, y, cfg);
  EXPECT_EQ(a.model.params(), b.model.params());
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  cfg.exec = Exec::kReference;
  const auto c = train(spec, x, y, cfg);
  for (std::size_t i = 0; i < c.model.params().size(); ++i)
    EXPECT_NEAR(a.model.params()[i], c.model.params()[i], 1e-9);
}

TEST(Train, SeparableBlobsReachFullAccuracy) {
  Rng rng(6);
  Matrix x;
  std::vector<int> y;
  blobs(rng, 50, 0.5, x, y);
  const auto spec = single({2}, {LayerSpec::dense(16), LayerSpec::relu(), LayerSpec::softmax_head(3)});
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  const auto r = train(spec, x, y, cfg);
  const auto pred = fusion::argmax_rows(r.model.forward(x));
  std::size_t ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += pred[i] == y[i];
  EXPECT_GE(static_cast<double>(ok) / static_cast<double>(y.size()), 0.99);
  EXPECT_LE(r.loss_curve.size(), 60u);
}

TEST(Train, LossNonIncreasingOnSeparableData) {
  int monotone = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    Matrix x;
    std::vector<int> y;
    blobs(rng, 30, 0.0, x, y);
    const auto spec = single({2}, {LayerSpec::dense(8), LayerSpec::relu(), LayerSpec::softmax_head(3)});
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.batch_size = 90;
    cfg.learning_rate = 1e-2;
    const auto r = train(spec, x, y, cfg);
    monotone += std::is_sorted(r.loss_curve.rbegin(), r.loss_curve.rend());
  }
  EXPECT_GE(monotone, 19);
}

TEST(Train, InvalidConfig) {
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), SpecError);
  cfg.epochs = 1;
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), SpecError);
}

TEST(Train, BatchClippedToRowCount) {
  Rng rng(7);
  Matrix x;
  std::vector<int> y;
  blobs(rng, 2, 0.1, x, y);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 1000;
  const auto r = train(single({2}, {LayerSpec::softmax_head(3)}), x, y, cfg);
  EXPECT_EQ(r.loss_curve.size(), 3u);
}

TEST(Serialize, ModelRoundTrip) {
  stressfuse::testing::TempDir dir("nn");
  const auto spec = fusion::build_multivariate(fusion::ModelKind::kCnn2d, featex::Modality::kLandmark, 100);
  Network net(spec);
  net.init(11);
  save_model(dir / "m.model", net, 11);
  const Network back = load_model(dir / "m.model");
  EXPECT_EQ(back.spec(), spec);
  EXPECT_EQ(back.params(), net.params());
}

TEST(Serialize, CorruptModelFile) {
  stressfuse::testing::TempDir dir("nn");
  Network net(single({2}, {LayerSpec::softmax_head(3)}));
  net.init(1);
  save_model(dir / "m.model", net);
  std::filesystem::resize_file(dir / "m.model", std::filesystem::file_size(dir / "m.model") - 8);
  EXPECT_THROW(load_model(dir / "m.model"), FormatError);
}

TEST(Serialize, SpecJsonRoundTrip) {
  const auto spec = fusion::build_early(fusion::ModelKind::kFcdnn, 100);
  nlohmann::json j = spec;
  EXPECT_EQ(j.get<ModelSpec>(), spec);
}

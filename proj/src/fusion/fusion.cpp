#include "stressfuse/fusion/fusion.hpp"

#include <cmath>

#include "stressfuse/common/error.hpp"

namespace stressfuse::fusion {

using nn::LayerSpec;

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kMultivariate: return "multivariate";
    case Family::kEarly: return "early";
    case Family::kLateDecision: return "late_decision";
    case Family::kLateConcat: return "late_concat";
  }
  return "?";
}

std::string_view kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::kCnn1d: return "cnn1d";
    case ModelKind::kCnn2d: return "cnn2d";
    case ModelKind::kFcdnn: return "fcdnn";
  }
  return "?";
}

Family family_from(std::string_view s) {
  for (auto f : {Family::kMultivariate, Family::kEarly, Family::kLateDecision, Family::kLateConcat})
    if (s == family_name(f)) return f;
  throw SpecError("unknown fusion family: " + std::string(s));
}

ModelKind kind_from(std::string_view s) {
  for (auto k : {ModelKind::kCnn1d, ModelKind::kCnn2d, ModelKind::kFcdnn})
    if (s == kind_name(k)) return k;
  throw SpecError("unknown model kind: " + std::string(s));
}

std::pair<std::size_t, std::size_t> Architecture::grid(std::size_t k) const {
  auto it = grids.find(k);
  if (it == grids.end()) throw SpecError("no 2D grid configured for " + std::to_string(k) + " features");
  if (it->second.first * it->second.second != k)
    throw SpecError("grid " + std::to_string(it->second.first) + "x" + std::to_string(it->second.second) +
                    " does not hold " + std::to_string(k) + " features");
  return it->second;
}

nn::BranchSpec build_trunk(ModelKind kind, std::size_t k, const Architecture& a) {
  if (k == 0) throw SpecError("trunk needs at least one feature");
  nn::BranchSpec b;
  switch (kind) {
    case ModelKind::kCnn1d:
      b.input_shape = {k, 1};
      b.layers = {LayerSpec::conv1d(a.conv1d_channels, a.conv1d_kernel), LayerSpec::relu(),
                  LayerSpec::maxpool1d(a.pool, a.pool_stride), LayerSpec::flatten()};
      break;
    case ModelKind::kCnn2d: {
      const auto [h, w] = a.grid(k);
      b.input_shape = {h, w, 1};
      b.layers = {LayerSpec::conv2d(a.conv2d_channels, a.conv2d_kernel, a.conv2d_kernel), LayerSpec::relu(),
                  LayerSpec::maxpool2d(a.pool, a.pool_stride), LayerSpec::flatten()};
      break;
    }
    case ModelKind::kFcdnn:
      b.input_shape = {k};
      b.layers = {LayerSpec::dense(a.fc_hidden), LayerSpec::relu()};
      break;
  }
  b.layers.push_back(LayerSpec::dense(a.hidden));
  b.layers.push_back(LayerSpec::relu());
  return b;
}

nn::ModelSpec build_multivariate(ModelKind kind, featex::Modality modality, std::size_t k, const Architecture& a) {
  nn::ModelSpec m;
  m.name = "multivariate-" + std::string(kind_name(kind)) + "-" + std::string(featex::modality_name(modality));
  m.branches = {build_trunk(kind, k, a)};
  m.branches[0].layers.push_back(LayerSpec::softmax_head(a.classes));
  m.validate();
  return m;
}

nn::ModelSpec build_early(ModelKind kind, std::size_t k_fused, const Architecture& a) {
  nn::ModelSpec m;
  m.name = "early-" + std::string(kind_name(kind));
  m.branches = {build_trunk(kind, k_fused, a)};
  m.branches[0].layers.push_back(LayerSpec::softmax_head(a.classes));
  m.validate();
  return m;
}

nn::ModelSpec build_late_concat(const nn::BranchSpec& trunk_bio, const nn::BranchSpec& trunk_lnd,
                                const Architecture& a) {
  for (const auto* t : {&trunk_bio, &trunk_lnd})
    for (const auto& l : t->layers)
      if (l.kind == nn::LayerKind::kSoftmaxHead) throw ShapeError("late-concat trunks must end before their heads");
  nn::ModelSpec m;
  m.name = "late_concat";
  m.branches = {trunk_bio, trunk_lnd};
  m.head = {LayerSpec::dense(a.hidden), LayerSpec::relu(), LayerSpec::softmax_head(a.classes)};
  m.validate();
  return m;
}

std::vector<int> argmax_rows(const Matrix& p) {
  std::vector<int> out(p.rows);
  for (std::size_t r = 0; r < p.rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < p.cols; ++c)
      if (p(r, c) > p(r, best)) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

Matrix average_probabilities(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw ShapeError("probability matrices differ in shape");
  Matrix out(a.rows, a.cols);
  for (std::size_t r = 0; r < a.rows; ++r) {
    double sa = 0.0, sb = 0.0;
    for (std::size_t c = 0; c < a.cols; ++c) {
      sa += a(r, c);
      sb += b(r, c);
      out(r, c) = 0.5 * (a(r, c) + b(r, c));
    }
    if (std::abs(sa - 1.0) > 1e-9 || std::abs(sb - 1.0) > 1e-9)
      throw InternalError("probability row " + std::to_string(r) + " is not normalized");
  }
  return out;
}

Prediction predict(const nn::Network& model, const Matrix& x) {
  Prediction p;
  p.probabilities = model.forward(x);
  p.labels = argmax_rows(p.probabilities);
  return p;
}

Prediction predict_late_decision(const nn::Network& model_bio, const nn::Network& model_lnd, const Matrix& x_bio,
                                 const Matrix& x_lnd) {
  Prediction p;
  p.probabilities = average_probabilities(model_bio.forward(x_bio), model_lnd.forward(x_lnd));
  p.labels = argmax_rows(p.probabilities);
  return p;
}

std::string FusionSpec::label() const {
  switch (family) {
    case Family::kMultivariate:
      return "multivariate-" + std::string(kind_name(kind)) + "-" + std::string(featex::modality_name(modality));
    case Family::kEarly: return "early-" + std::string(kind_name(kind));
    default: return std::string(family_name(family));
  }
}

void FusionSpec::validate() const {
  if (arch.classes < 2) throw SpecError("need at least 2 classes");
  if (arch.pool == 0 || arch.pool_stride == 0) throw SpecError("pool window and stride must be positive");
}

std::vector<FusionSpec> paper_combinations() {
  std::vector<FusionSpec> out;
  for (auto k : {ModelKind::kCnn1d, ModelKind::kCnn2d, ModelKind::kFcdnn})
    for (auto m : {featex::Modality::kBio, featex::Modality::kLandmark}) {
      FusionSpec f;
      f.family = Family::kMultivariate;
      f.kind = k;
      f.modality = m;
      out.push_back(f);
    }
  for (auto k : {ModelKind::kCnn1d, ModelKind::kCnn2d, ModelKind::kFcdnn}) {
    FusionSpec f;
    f.family = Family::kEarly;
    f.kind = k;
    out.push_back(f);
  }
  for (auto fam : {Family::kLateDecision, Family::kLateConcat}) {
    FusionSpec f;
    f.family = fam;
    out.push_back(f);
  }
  return out;
}

void to_json(nlohmann::json& j, const Architecture& a) {
  nlohmann::json grids = nlohmann::json::array();
  for (const auto& [k, g] : a.grids) grids.push_back({{"features", k}, {"rows", g.first}, {"cols", g.second}});
  j = {{"conv1d_channels", a.conv1d_channels}, {"conv1d_kernel", a.conv1d_kernel},
       {"conv2d_channels", a.conv2d_channels}, {"conv2d_kernel", a.conv2d_kernel},
       {"pool", a.pool},                       {"pool_stride", a.pool_stride},
       {"fc_hidden", a.fc_hidden},             {"hidden", a.hidden},
       {"classes", a.classes},                 {"grids", grids}};
}

void from_json(const nlohmann::json& j, Architecture& a) {
  a = Architecture{};
  a.conv1d_channels = j.value("conv1d_channels", a.conv1d_channels);
  a.conv1d_kernel = j.value("conv1d_kernel", a.conv1d_kernel);
  a.conv2d_channels = j.value("conv2d_channels", a.conv2d_channels);
  a.conv2d_kernel = j.value("conv2d_kernel", a.conv2d_kernel);
  a.pool = j.value("pool", a.pool);
  a.pool_stride = j.value("pool_stride", a.pool_stride);
  a.fc_hidden = j.value("fc_hidden", a.fc_hidden);
  a.hidden = j.value("hidden", a.hidden);
  a.classes = j.value("classes", a.classes);
  if (j.contains("grids")) {
    a.grids.clear();
    for (const auto& g : j.at("grids"))
      a.grids[g.at("features").get<std::size_t>()] = {g.at("rows").get<std::size_t>(), g.at("cols").get<std::size_t>()};
  }
}

void to_json(nlohmann::json& j, const FusionSpec& f) {
  j = {{"family", family_name(f.family)},
       {"kind", kind_name(f.kind)},
       {"modality", featex::modality_name(f.modality)},
       {"bio_kind", kind_name(f.bio_kind)},
       {"lnd_kind", kind_name(f.lnd_kind)},
       {"architecture", f.arch}};
}

void from_json(const nlohmann::json& j, FusionSpec& f) {
  f = FusionSpec{};
  f.family = family_from(j.value("family", std::string("early")));
  f.kind = kind_from(j.value("kind", std::string("cnn1d")));
  const std::string mod = j.value("modality", std::string("bio"));
  if (mod != "bio" && mod != "lnd") throw SpecError("modality must be bio or lnd");
  f.modality = mod == "bio" ? featex::Modality::kBio : featex::Modality::kLandmark;
  f.bio_kind = kind_from(j.value("bio_kind", std::string("cnn1d")));
  f.lnd_kind = kind_from(j.value("lnd_kind", std::string("cnn2d")));
  if (j.contains("architecture")) f.arch = j.at("architecture").get<Architecture>();
  f.validate();
}

}  // namespace stressfuse::fusion

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stressfuse/common/error.hpp"
#include "stressfuse/common/rng.hpp"
#include "stressfuse/featex/matrix.hpp"
#include "stressfuse/featex/manifest.hpp"
#include "stressfuse/select/select.hpp"
#include "stressfuse/sigcore/synth.hpp"

using namespace stressfuse;
using namespace stressfuse::select;

namespace {

Matrix column_matrix(const std::vector<std::vector<double>>& cols) {
  Matrix m(cols.front().size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < m.rows; ++r) m(r, c) = cols[c][r];
  return m;
}

Matrix random_matrix(Rng& rng, std::size_t n, std::size_t p) {
  Matrix m(n, p);
  for (double& v : m.data) v = rng.normal();
  return m;
}

Matrix standardize(const Matrix& x) {
  Standardizer s;
  return s.fit_transform(x);
}

double soft(double z, double l) { return z > l ? z - l : z < -l ? z + l : 0.0; }

// max over j of the KKT violation for (1/2n)||y - Xb - b0||^2 + lambda |b|_1.
double kkt_slack(const Matrix& x, std::span<const double> y, const LassoFit& fit, double lambda) {
  const std::size_t n = x.rows, p = x.cols;
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    double f = fit.intercept;
    for (std::size_t j = 0; j < p; ++j) f += x(i, j) * fit.beta[j];
    r[i] = y[i] - f;
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += x(i, j) * r[i];
    g /= static_cast<double>(n);
    const double v = fit.beta[j] == 0.0 ? std::max(0.0, std::abs(g) - lambda)
                                        : std::abs(g - lambda * (fit.beta[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

featex::FeatureMatrix synth_matrix(const std::string& preset, bool normalize = true) {
  sigcore::SynthSpec spec;
  spec.n_subjects = 3;
  spec.session_seconds = 600;
  featex::BuildOptions opt;
  opt.normalize = normalize;
  return featex::build_matrix(sigcore::synth_dataset(spec), featex::FeatureManifest::from_preset(preset), opt);
}

}  // namespace

TEST(Corr, PearsonExactLinearity) {
  const Matrix x = column_matrix({{1, 2, 3}});
  const std::vector<int> y{2, 4, 6};
  EXPECT_NEAR(corr_scores(x, y, CorrKind::kPearson)[0], 1.0, 1e-15);
}

TEST(Corr, SpearmanMonotoneNonlinear) {
  const Matrix x = column_matrix({{1, 2, 3, 4}});
  const std::vector<int> y{1, 4, 9, 30};
  EXPECT_NEAR(corr_scores(x, y, CorrKind::kSpearman)[0], 1.0, 1e-15);
  EXPECT_LT(corr_scores(x, y, CorrKind::kPearson)[0], 1.0);
}

TEST(Corr, ConstantFeatureScoresZero) {
  const Matrix x = column_matrix({{5, 5, 5}, {1, 2, 3}});
  const std::vector<int> y{0, 1, 2};
  EXPECT_EQ(corr_scores(x, y, CorrKind::kPearson)[0], 0.0);
  EXPECT_EQ(corr_scores(x, y, CorrKind::kSpearman)[0], 0.0);
}

TEST(Corr, SingleRowIsLengthError) {
  const Matrix x = column_matrix({{1}});
  const std::vector<int> y{0};
  EXPECT_THROW(corr_scores(x, y, CorrKind::kPearson), LengthError);
}

TEST(Corr, PositiveScalingKeepsScores) {
  Rng rng(4);
  Matrix x = random_matrix(rng, 60, 5);
  std::vector<int> y(60);
  for (auto& v : y) v = static_cast<int>(rng.below(3));
  const auto p0 = corr_scores(x, y, CorrKind::kPearson);
  const auto s0 = corr_scores(x, y, CorrKind::kSpearman);
  for (std::size_t r = 0; r < x.rows; ++r) x(r, 2) *= 37.0;
  const auto p1 = corr_scores(x, y, CorrKind::kPearson);
  const auto s1 = corr_scores(x, y, CorrKind::kSpearman);
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_NEAR(p0[j], p1[j], 1e-12);
    EXPECT_EQ(s0[j], s1[j]);
  }
}

TEST(Ranks, AverageTies) {
  const std::vector<double> v{10, 20, 20, 5};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(Variance, HandComputed) {
  const Matrix x = column_matrix({{0, 2}, {3, 3}});
  const auto v = variance_scores(x);
  EXPECT_EQ(v[0], 1.0);
  EXPECT_EQ(v[1], 0.0);
}

TEST(Lasso, AboveLambdaMaxIsZero) {
  Rng rng(1);
  const Matrix x = standardize(random_matrix(rng, 80, 6));
  std::vector<double> y(80);
  for (std::size_t i = 0; i < 80; ++i) y[i] = x(i, 0) - 2 * x(i, 3) + rng.normal(0, 0.1);
  const double lmax = lasso_lambda_max(x, y);
  const auto fit = lasso_fit(x, y, lmax);
  for (double b : fit.beta) EXPECT_EQ(b, 0.0);
  const auto fit2 = lasso_fit(x, y, lmax * 0.99);
  EXPECT_NE(std::count(fit2.beta.begin(), fit2.beta.end(), 0.0), 6);
}

TEST(Lasso, SingleStandardizedFeatureClosedForm) {
  Rng rng(8);
  const Matrix x = standardize(random_matrix(rng, 50, 1));
  std::vector<double> y(50);
  for (std::size_t i = 0; i < 50; ++i) y[i] = 0.7 * x(i, 0) + rng.normal(0, 0.5) + 3.0;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / 50.0;
  double xy = 0.0;
  for (std::size_t i = 0; i < 50; ++i) xy += x(i, 0) * (y[i] - ym);
  xy /= 50.0;
  for (double lambda : {0.0, 0.1, 0.3, 2.0}) {
    const auto fit = lasso_fit(x, y, lambda);
    EXPECT_NEAR(fit.beta[0], soft(xy, lambda), 1e-10) << lambda;
  }
}

TEST(Lasso, KktHoldsOnRandomProblems) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 40 + rng.below(80), p = 5 + rng.below(40);
    const Matrix x = standardize(random_matrix(rng, n, p));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 2 * x(i, 0) - x(i, p - 1) + rng.normal();
    const double lambda = lasso_lambda_max(x, y) * rng.uniform(0.01, 0.9);
    const auto fit = lasso_fit(x, y, lambda);
    EXPECT_TRUE(fit.converged);
    EXPECT_LE(kkt_slack(x, y, fit, lambda), 1e-6) << "trial " << trial;
  }
}

TEST(Lasso, PlantedSupportRecovered) {
  Rng rng(500);
  const Matrix x = standardize(random_matrix(rng, 500, 50));
  std::vector<double> y(500);
  for (std::size_t i = 0; i < 500; ++i) y[i] = 1.5 * x(i, 4) - 2.0 * x(i, 17) + 1.0 * x(i, 41) + rng.normal(0, 0.1);
  const auto fit = lasso_fit(x, y, 0.05);
  for (std::size_t j = 0; j < 50; ++j) EXPECT_EQ(fit.beta[j] != 0.0, j == 4 || j == 17 || j == 41) << j;
}

TEST(Lasso, NonFiniteInputIsNumericError) {
  Matrix x(4, 2, 1.0);
  x(1, 1) = std::nan("");
  const std::vector<double> y{0, 1, 0, 1};
  EXPECT_THROW(lasso_fit(x, y, 0.1), NumericError);
}

TEST(Forest, ScoresSumToOne) {
  Rng rng(3);
  const Matrix x = random_matrix(rng, 120, 8);
  std::vector<int> y(120);
  for (std::size_t i = 0; i < 120; ++i) y[i] = x(i, 1) > 0.3 ? 2 : x(i, 5) > 0 ? 1 : 0;
  for (int trees : {1, 2, 7, 100}) {
    ForestConfig cfg;
    cfg.n_trees = trees;
    const auto s = rf_importance(x, y, cfg);
    EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), 1.0, 1e-9);
    for (double v : s) EXPECT_GE(v, 0.0);
  }
}

TEST(Forest, DeterminingFeatureRanksFirst) {
  Rng rng(12);
  Matrix x = random_matrix(rng, 200, 6);
  std::vector<int> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = x(i, 0) < -0.4 ? 0 : x(i, 0) < 0.4 ? 1 : 2;
  const auto s = rf_importance(x, y);
  EXPECT_EQ(rank_by_score(s).front(), 0u);
}

TEST(Forest, PureLabelsGiveUniformScores) {
  Rng rng(2);
  const Matrix x = random_matrix(rng, 30, 4);
  const std::vector<int> y(30, 1);
  for (double v : rf_importance(x, y)) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Forest, TooFewRows) {
  const Matrix x(3, 2, 1.0);
  const std::vector<int> y{0, 1, 2};
  EXPECT_THROW(rf_importance(x, y), DataError);
}

TEST(Forest, SerialEqualsParallelAndIsDeterministic) {
  Rng rng(6);
  const Matrix x = random_matrix(rng, 150, 10);
  std::vector<int> y(150);
  for (std::size_t i = 0; i < 150; ++i) y[i] = static_cast<int>(rng.below(3));
  ForestConfig par, ser;
  ser.parallel = false;
  EXPECT_EQ(rf_importance(x, y, par), rf_importance(x, y, par));
  EXPECT_EQ(rf_importance(x, y, par), rf_importance(x, y, ser));
}

TEST(Rfe, KeepsTheSignal) {
  Rng rng(10);
  const Matrix x = standardize(random_matrix(rng, 100, 2));
  std::vector<double> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = 3 * x(i, 0) + rng.normal(0, 0.3);
  const auto r = rfe(x, y, 1);
  EXPECT_EQ(r.selected, (std::vector<std::size_t>{0}));
}

TEST(Rfe, FullKIsIdentitySelection) {
  Rng rng(11);
  const Matrix x = standardize(random_matrix(rng, 30, 5));
  std::vector<double> y(30);
  for (auto& v : y) v = rng.normal();
  auto sel = rfe(x, y, 5).selected;
  std::sort(sel.begin(), sel.end());
  EXPECT_EQ(sel, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Rfe, DeterministicAndCompleteRanking) {
  Rng rng(13);
  const Matrix x = standardize(random_matrix(rng, 60, 25));
  std::vector<double> y(60);
  for (std::size_t i = 0; i < 60; ++i) y[i] = x(i, 3) - x(i, 9) + rng.normal(0, 0.5);
  const auto a = rfe(x, y, 4);
  const auto b = rfe(x, y, 4);
  EXPECT_EQ(a.ranking, b.ranking);
  EXPECT_EQ(a.selected, b.selected);
  auto all = a.ranking;
  std::sort(all.begin(), all.end());
  for (std::size_t j = 0; j < 25; ++j) EXPECT_EQ(all[j], j);
  EXPECT_TRUE(std::count(a.selected.begin(), a.selected.end(), 3u));
  EXPECT_TRUE(std::count(a.selected.begin(), a.selected.end(), 9u));
}

TEST(RankByScore, TiesByAscendingIndex) {
  const std::vector<double> s{0.5, 0.9, 0.5, 0.9, 0.1};
  EXPECT_EQ(rank_by_score(s), (std::vector<std::size_t>{1, 3, 0, 2, 4}));
}

TEST(Select, PaperSizes) {
  const auto fused = synth_matrix("fused-paper");
  const auto bio = fused.select_cols(fused.columns_of(featex::Modality::kBio));
  const auto lnd = fused.select_cols(fused.columns_of(featex::Modality::kLandmark));
  EXPECT_EQ(select::select(bio, "lasso", 30).matrix.cols(), 30u);
  EXPECT_EQ(select::select(lnd, "lasso", 100).matrix.cols(), 100u);
  const auto s = select::select(fused, "lasso", 100);
  EXPECT_EQ(s.matrix.cols(), 100u);
  EXPECT_EQ(s.matrix.feature_names, s.report.selected_names());
}

TEST(Select, EveryMethodReturnsKColumnsDeterministically) {
  const auto m = synth_matrix("bio-paper");
  for (auto method : kMethodNames) {
    const auto a = select::select(m, method, 12);
    const auto b = select::select(m, method, 12);
    EXPECT_EQ(a.matrix.cols(), 12u) << method;
    EXPECT_EQ(a.report.selected, b.report.selected) << method;
    EXPECT_EQ(a.report.ranking.size(), m.cols()) << method;
  }
}

TEST(Select, KLargerThanColumnsIsClamped) {
  const auto m = synth_matrix("bio-paper");
  EXPECT_EQ(select::select(m, "pearson", 1000).matrix.cols(), m.cols());
}

TEST(Select, UnknownMethod) {
  const auto m = synth_matrix("bio-paper");
  EXPECT_THROW(select::select(m, "magic", 3), SpecError);
}

// Count statistics of the slow EDA-derived series spread wider than those of
// the other channels, so EDA columns lead a variance ranking restricted to them.
TEST(Select, EdaCountsLeadVarianceAmongCountFeatures) {
  const auto raw = synth_matrix("bio-paper", false);
  const auto v = variance_scores(raw.values);
  std::vector<std::size_t> counts;
  for (std::size_t j = 0; j < raw.cols(); ++j) {
    const auto& n = raw.feature_names[j];
    if (n.rfind("above_mean_", 0) == 0 || n.rfind("below_mean_", 0) == 0) counts.push_back(j);
  }
  std::stable_sort(counts.begin(), counts.end(), [&](auto a, auto b) { return v[a] > v[b]; });
  ASSERT_EQ(counts.size(), 22u);
  for (std::size_t i = 0; i < 8; ++i)
    EXPECT_NE(raw.feature_names[counts[i]].find("_EDA"), std::string::npos) << raw.feature_names[counts[i]];
}

TEST(Select, VarianceUsesRawValuesWhenGiven) {
  const auto norm = synth_matrix("bio-paper");
  const auto raw = synth_matrix("bio-paper", false);
  SelectOptions opts;
  opts.raw_values = &raw.values;
  const auto with_raw = select::select(norm, "variance", 5, opts);
  const auto expected = rank_by_score(variance_scores(raw.values));
  EXPECT_EQ(with_raw.report.selected, std::vector<std::size_t>(expected.begin(), expected.begin() + 5));
}

TEST(Standardizer, FitTransformAndSubjects) {
  Matrix x(4, 2);
  x.data = {1, 5, 2, 5, 3, 5, 4, 5};
  const std::vector<std::string> subjects{"S01", "S01", "S02", "S02"};
  Standardizer s;
  const Matrix z = s.fit_transform(x, subjects);
  EXPECT_EQ(s.fit_subjects(), (std::set<std::string>{"S01", "S02"}));
  EXPECT_EQ(s.scale()[1], 1.0);
  double mean = 0, var = 0;
  for (std::size_t r = 0; r < 4; ++r) mean += z(r, 0);
  for (std::size_t r = 0; r < 4; ++r) var += z(r, 0) * z(r, 0);
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(var / 4, 1.0, 1e-12);
  for (std::size_t r = 0; r < 4; ++r) EXPECT_EQ(z(r, 1), 0.0);
}

#include <gtest/gtest.h>

#include <fstream>
#include <numeric>

#include "oracles.hpp"
#include "stressfuse/common/error.hpp"
#include "stressfuse/common/rng.hpp"
#include "stressfuse/explain/explain.hpp"
#include "support.hpp"

using namespace stressfuse;
using namespace stressfuse::explain;

namespace {

Matrix random_background(Rng& rng, std::size_t n, std::size_t p) {
  Matrix m(n, p);
  for (double& v : m.data) v = rng.normal(0.5, 2.0);
  return m;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST(LinearShap, WorkedExample) {
  Matrix bg(2, 2);
  bg.data = {0, 2, 2, 0};  // mean [1, 1]
  const std::vector<double> beta{2, -1}, x{3, 1};
  const auto e = linear_shap(beta, 0.0, bg, x);
  EXPECT_EQ(e.phi, (std::vector<double>{4, 0}));
  EXPECT_EQ(e.base_value, 1.0);
  EXPECT_EQ(e.prediction, 5.0);
}

TEST(LinearShap, BackgroundMeanGivesZeroAttribution) {
  Rng rng(1);
  const Matrix bg = random_background(rng, 40, 5);
  const LinearExplainer ex({1, -2, 0.5, 3, 0}, 0.7, bg);
  const auto e = ex.explain(ex.background_mean());
  for (double v : e.phi) EXPECT_NEAR(v, 0.0, 1e-15);
  EXPECT_NEAR(e.prediction, e.base_value, 1e-12);
}

TEST(LinearShap, AdditivityOnManyRows) {
  Rng rng(2);
  const std::size_t p = 12;
  std::vector<double> beta(p);
  for (double& b : beta) b = rng.normal();
  const Matrix bg = random_background(rng, 50, p);
  const LinearExplainer ex(beta, -1.3, bg);
  const Matrix x = random_background(rng, 1000, p);
  const auto rows = ex.explain_rows(x);
  ASSERT_EQ(rows.size(), 1000u);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double f = -1.3;
    for (std::size_t j = 0; j < p; ++j) f += beta[j] * x(r, j);
    ASSERT_NEAR(rows[r].base_value + sum(rows[r].phi), f, 1e-10);
    ASSERT_NEAR(rows[r].prediction, f, 1e-10);
  }
}

TEST(LinearShap, ZeroCoefficientsGetExactlyZero) {
  Rng rng(3);
  const Matrix bg = random_background(rng, 30, 4);
  const LinearExplainer ex({0, 1.5, 0, -2}, 0, bg);
  const Matrix x = random_background(rng, 100, 4);
  for (const auto& e : ex.explain_rows(x)) {
    EXPECT_EQ(e.phi[0], 0.0);
    EXPECT_EQ(e.phi[2], 0.0);
  }
}

TEST(LinearShap, LinearInCoefficients) {
  Rng rng(4);
  const Matrix bg = random_background(rng, 30, 3);
  const std::vector<double> x{1, -2, 0.5};
  const auto a = linear_shap(std::vector<double>{1, 2, 3}, 0, bg, x);
  const auto b = linear_shap(std::vector<double>{-1, 0.5, 2}, 0, bg, x);
  const auto ab = linear_shap(std::vector<double>{0, 2.5, 5}, 0, bg, x);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(ab.phi[j], a.phi[j] + b.phi[j], 1e-12);
}

TEST(LinearShap, MatchesCoalitionEnumeration) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::size_t p = 2 + rng.below(6);
    std::vector<double> beta(p);
    for (double& b : beta) b = rng.normal();
    const Matrix bg = random_background(rng, 8, p);
    std::vector<std::vector<double>> bg_rows;
    for (std::size_t r = 0; r < bg.rows; ++r) bg_rows.emplace_back(bg.row(r).begin(), bg.row(r).end());
    std::vector<double> x(p);
    for (double& v : x) v = rng.normal(0, 3);
    const auto e = linear_shap(beta, 0.2, bg, x);
    const auto o = oracle::shapley_bruteforce(beta, 0.2, bg_rows, x);
    for (std::size_t j = 0; j < p; ++j) EXPECT_NEAR(e.phi[j], o[j], 1e-10);
  }
}

TEST(LinearShap, ShapeErrors) {
  Matrix bg(3, 2, 1.0);
  EXPECT_THROW(LinearExplainer({1, 2, 3}, 0, bg), ShapeError);
  EXPECT_THROW(LinearExplainer({1, 2}, 0, Matrix(0, 2)), ShapeError);
  const LinearExplainer ex({1, 2}, 0, bg);
  EXPECT_THROW(ex.explain(std::vector<double>{1}), ShapeError);
}

TEST(Summary, RankingByMeanAbsolutePhi) {
  std::vector<Explanation> rows(2);
  rows[0].names = rows[1].names = {"a", "b", "c"};
  rows[0].phi = {0.1, -2.0, 0.5};
  rows[1].phi = {0.3, 1.0, -0.5};
  const auto s = summary_ranking(rows);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].name, "b");
  EXPECT_DOUBLE_EQ(s[0].mean_abs_phi, 1.5);
  EXPECT_DOUBLE_EQ(s[0].positive_fraction, 0.5);
  EXPECT_EQ(s[1].name, "c");
  EXPECT_EQ(s[2].name, "a");
  EXPECT_DOUBLE_EQ(s[2].positive_fraction, 1.0);
}

TEST(Summary, TiesKeepColumnOrder) {
  std::vector<Explanation> rows(1);
  rows[0].names = {"x", "y", "z"};
  rows[0].phi = {1.0, -1.0, 1.0};
  const auto s = summary_ranking(rows);
  EXPECT_EQ(s[0].index, 0u);
  EXPECT_EQ(s[1].index, 1u);
  EXPECT_EQ(s[2].index, 2u);
}

TEST(Output, CsvJsonAndSvg) {
  Rng rng(6);
  const Matrix bg = random_background(rng, 10, 3);
  const LinearExplainer ex({1, 0, -1}, 0.5, bg, {"f<1>", "f2", "f&3"});
  const auto rows = ex.explain_rows(random_background(rng, 5, 3));
  stressfuse::testing::TempDir dir("explain");
  write_summary_csv(dir / "s.csv", summary_ranking(rows));
  write_force_svg(dir / "f.svg", rows[0]);
  std::ifstream csv(dir / "s.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "feature,mean_abs_phi,positive_fraction");
  std::ifstream svg(dir / "f.svg");
  const std::string text((std::istreambuf_iterator<char>(svg)), {});
  EXPECT_NE(text.find("f&lt;1&gt;"), std::string::npos);
  EXPECT_EQ(text.find("f<1>"), std::string::npos);
  const auto j = rows[0].to_json();
  EXPECT_EQ(j["contributions"].size(), 3u);
  EXPECT_EQ(j["contributions"][0]["feature"], "f<1>");
  EXPECT_DOUBLE_EQ(j["base_value"].get<double>(), rows[0].base_value);
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "stressfuse/common/error.hpp"
#include "stressfuse/common/rng.hpp"
#include "stressfuse/featex/landmarks.hpp"
#include "stressfuse/featex/manifest.hpp"
#include "stressfuse/featex/matrix.hpp"
#include "stressfuse/featex/stats.hpp"
#include "stressfuse/featex/windows.hpp"
#include "stressfuse/sigcore/face.hpp"
#include "stressfuse/sigcore/synth.hpp"
#include "support.hpp"

using namespace stressfuse;
using namespace stressfuse::featex;

namespace {

double stat(const StatVector& v, Stat s) { return v[static_cast<std::size_t>(s)]; }

std::vector<sigcore::AlignedSession> small_corpus(int subjects = 3, int seconds = 300) {
  sigcore::SynthSpec spec;
  spec.n_subjects = subjects;
  spec.session_seconds = seconds;
  return sigcore::synth_dataset(spec);
}

std::size_t column(const FeatureMatrix& m, const std::string& name) {
  const auto it = std::find(m.feature_names.begin(), m.feature_names.end(), name);
  EXPECT_NE(it, m.feature_names.end()) << name;
  return static_cast<std::size_t>(it - m.feature_names.begin());
}

}  // namespace

TEST(Windows, CountFormula) {
  const auto w = windows(100, WindowSpec{});
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(w[0], (Window{0, 40}));
  EXPECT_EQ(w[1], (Window{20, 60}));
  EXPECT_EQ(w[2], (Window{40, 80}));
  EXPECT_EQ(w[3], (Window{60, 100}));
  EXPECT_EQ(windows(40, WindowSpec{}).size(), 1u);
  EXPECT_TRUE(windows(39, WindowSpec{}).empty());
}

TEST(Windows, InvalidSpec) {
  EXPECT_THROW((WindowSpec{0, 1}.validate()), SpecError);
  EXPECT_THROW((WindowSpec{40, 0}.validate()), SpecError);
  EXPECT_THROW((WindowSpec{40, 41}.validate()), SpecError);
}

TEST(BinLabel, Boundaries) {
  EXPECT_EQ(bin_label(std::vector<double>(40, 3.0)), 0);
  EXPECT_EQ(bin_label(std::vector<double>{6.0, 7.0}), 1);  // mean 6.5 rounds up to 7
  EXPECT_EQ(bin_label(std::vector<double>(5, 6.4)), 0);
  EXPECT_EQ(bin_label(std::vector<double>(5, 13.0)), 1);
  EXPECT_EQ(bin_label(std::vector<double>(5, 14.0)), 2);
  EXPECT_EQ(bin_label(std::vector<double>(5, 19.0)), 2);
}

TEST(BinLabel, OutOfRange) {
  EXPECT_THROW(bin_label(std::vector<double>{3.0, 19.5}), LabelError);
  EXPECT_THROW(bin_label(std::vector<double>{-0.1}), LabelError);
  EXPECT_THROW(bin_label(std::vector<double>{}), LabelError);
}

TEST(Stats, HandComputedSmallWindow) {
  const std::vector<double> x{1, 2, 3};
  const auto s = stat_features(x);
  EXPECT_EQ(stat(s, Stat::kAbsEnergy), 14.0);
  EXPECT_EQ(stat(s, Stat::kMean), 2.0);
  EXPECT_EQ(stat(s, Stat::kMax), 3.0);
  EXPECT_EQ(stat(s, Stat::kMin), 1.0);
  EXPECT_NEAR(stat(s, Stat::kSkewness), 0.0, 1e-15);
  EXPECT_EQ(stat(s, Stat::kCountAboveMean), 1.0);
  EXPECT_EQ(stat(s, Stat::kCountBelowMean), 1.0);
  EXPECT_NEAR(stat(s, Stat::kVariance), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(stat(s, Stat::kStd), 1.0, 1e-15);
  EXPECT_NEAR(stat(s, Stat::kQuantile), 2.5, 1e-15);
}

TEST(Stats, ConstantWindow) {
  const std::vector<double> x(40, -2.5);
  const auto s = stat_features(x);
  EXPECT_EQ(stat(s, Stat::kVariance), 0.0);
  EXPECT_EQ(stat(s, Stat::kFourierEntropy), 0.0);
  EXPECT_EQ(stat(s, Stat::kAutocorrelation), 0.0);
  EXPECT_EQ(stat(s, Stat::kRms), 2.5);
  EXPECT_EQ(stat(s, Stat::kMean), -2.5);
  EXPECT_EQ(stat(s, Stat::kAbsEnergy), 250.0);
}

TEST(Stats, TooShort) { EXPECT_THROW(stat_features(std::vector<double>{1.0}), LengthError); }

TEST(Stats, MatchBruteForceOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x(40);
    const double mu = rng.uniform(-5, 5), sd = rng.uniform(0.1, 3.0);
    for (double& v : x) v = rng.normal(mu, sd);
    if (trial % 7 == 0)
      for (double& v : x) v = std::round(v);  // ties
    const auto got = stat_features(x);
    const auto want = oracle::window_stats(x);
    for (std::size_t k = 0; k < kStatCount; ++k) {
      ASSERT_TRUE(oracle::close(got[k], want[k], 1e-10)) << kStatNames[k] << " trial " << trial << ": " << got[k]
                                                         << " vs " << want[k];
    }
  }
}

TEST(Stats, NamesAreTheFifteenShortNames) {
  EXPECT_EQ(kStatCount, 15u);
  std::set<std::string_view> names(kStatNames.begin(), kStatNames.end());
  EXPECT_EQ(names.size(), 15u);
  EXPECT_TRUE(names.count("energy"));
  EXPECT_TRUE(names.count("below_mean"));
}

TEST(Landmarks, SymmetricFace) {
  const auto g = landmark_derived(sigcore::canonical_face());
  EXPECT_NEAR(g[14], 0.0, 1e-12);  // mouth_asymmetry
  EXPECT_NEAR(g[0], g[1], 1e-12);  // ear
  EXPECT_NEAR(g[7], g[8], 1e-12);  // inner brow-eye
  EXPECT_NEAR(g[25], g[26], 1e-12);
}

TEST(Landmarks, ScaleAndTranslationInvariant) {
  sigcore::Frame f = sigcore::canonical_face();
  const auto base = landmark_derived(f);
  for (auto& p : f) p = {2.0 * p.x + 31.0, 2.0 * p.y - 7.0};
  const auto scaled = landmark_derived(f);
  for (std::size_t k = 0; k < kGeometryCount; ++k) EXPECT_NEAR(scaled[k], base[k], 1e-12) << kGeometryNames[k];
}

TEST(Landmarks, HandComputedGeometry) {
  // Eye corners on a unit grid: right eye points 36..41 centred at (-1, 0),
  // left eye 42..47 centred at (1, 0), so D = 2.
  sigcore::Frame f{};
  for (auto& p : f) p = {0.0, 5.0};
  const double rx = -1.0, lx = 1.0;
  f[36] = {rx - 0.5, 0};
  f[39] = {rx + 0.5, 0};
  f[37] = {rx - 0.2, -0.1};
  f[38] = {rx + 0.2, -0.1};
  f[40] = {rx + 0.2, 0.1};
  f[41] = {rx - 0.2, 0.1};
  f[42] = {lx - 0.5, 0};
  f[45] = {lx + 0.5, 0};
  f[43] = {lx - 0.2, -0.3};
  f[44] = {lx + 0.2, -0.3};
  f[46] = {lx + 0.2, 0.3};
  f[47] = {lx - 0.2, 0.3};
  f[48] = {-0.6, 2.0};
  f[54] = {0.8, 2.0};
  f[51] = {0.0, 1.8};
  f[57] = {0.0, 2.3};
  f[33] = {0.0, 1.0};
  f[0] = {-3.0, 0.0};
  f[16] = {3.0, 0.0};
  const auto g = landmark_derived(f);
  const double D = 2.0;
  EXPECT_NEAR(g[0], 0.2 / 1.0, 1e-12);               // (0.2 + 0.2) / (2 * 1)
  EXPECT_NEAR(g[1], 0.6 / 1.0, 1e-12);               // (0.6 + 0.6) / (2 * 1)
  EXPECT_NEAR(g[2], 0.2 / D, 1e-12);
  EXPECT_NEAR(g[4], 1.4 / D, 1e-12);                 // mouth width
  EXPECT_NEAR(g[5], 0.5 / D, 1e-12);                 // mouth height
  EXPECT_NEAR(g[6], 0.5 / 1.4, 1e-12);
  EXPECT_NEAR(g[13], 6.0 / D, 1e-12);                // jaw width
  EXPECT_NEAR(g[14], (std::hypot(0.6, 1.0) - std::hypot(0.8, 1.0)) / D, 1e-12);
  EXPECT_NEAR(g[15], D / 6.0, 1e-12);
}

TEST(Landmarks, CoincidentEyesAreDegenerate) {
  sigcore::Frame f{};
  for (auto& p : f) p = {1.0, 1.0};
  EXPECT_THROW(landmark_derived(f), DegenerateFrameError);
}

TEST(Manifest, PresetSizes) {
  EXPECT_EQ(FeatureManifest::from_preset("bio-paper").size(), 175u);
  EXPECT_EQ(FeatureManifest::from_preset("lnd-paper").size(), 1904u);
  EXPECT_EQ(FeatureManifest::from_preset("fused-paper").size(), 2079u);
  EXPECT_EQ(FeatureManifest::from_preset("lnd-geometry").size(), 2354u);
  EXPECT_EQ(FeatureManifest::from_preset("fused-geometry").size(), 2529u);
  EXPECT_THROW(FeatureManifest::from_preset("nope"), SpecError);
}

TEST(Manifest, NamesUniqueAndModalitiesConsistent) {
  const auto m = FeatureManifest::from_preset("fused-geometry");
  const auto names = m.names();
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
  std::size_t bio = 0;
  for (const auto& n : names) bio += column_modality(n) == Modality::kBio;
  EXPECT_EQ(bio, 175u);
}

TEST(Manifest, WithoutEdaComponents) {
  const auto m = FeatureManifest::from_preset("fused-paper").without_eda_components();
  EXPECT_EQ(m.size(), 2079u - 2 * 15 - 10);
  for (const auto& c : m.columns) {
    EXPECT_NE(c.source, "EDA_Tonic");
    EXPECT_NE(c.source, "EDA_Phasic");
    EXPECT_NE(c.kind, SourceKind::kScr);
  }
}

TEST(Manifest, JsonRoundTrip) {
  const auto m = FeatureManifest::from_preset("bio-paper").without_eda_components();
  const auto back = FeatureManifest::from_json(m.to_json());
  EXPECT_EQ(back.names(), m.names());
  EXPECT_EQ(back.columns, m.columns);
}

TEST(BuildMatrix, FusedPresetShape) {
  const auto sessions = small_corpus();
  const auto m = build_matrix(sessions, FeatureManifest::from_preset("fused-paper"));
  EXPECT_EQ(m.cols(), 2079u);
  // floor((300 - 40) / 20) + 1 = 14 windows per session.
  EXPECT_EQ(m.rows(), 3u * 14u);
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.subjects(), (std::vector<std::string>{"S01", "S02", "S03"}));
}

TEST(BuildMatrix, NanSecondDropsExactlyItsWindow) {
  auto sessions = small_corpus(2, 120);
  // Second 5 lies only in window [0, 40).
  sessions[0].channels["HR"][5] = std::nan("");
  BuildOptions opt;
  opt.normalize = false;
  const auto clean = build_matrix(small_corpus(2, 120), FeatureManifest::from_preset("bio-paper"), opt);
  const auto m = build_matrix(sessions, FeatureManifest::from_preset("bio-paper"), opt);
  EXPECT_EQ(m.rows() + 1, clean.rows());
  EXPECT_EQ(m.dropped_windows, 1u);
  // Remaining rows of subject 1 equal the clean rows 1.. of subject 1.
  for (std::size_t c = 0; c < m.cols(); ++c) EXPECT_EQ(m.values(0, c), clean.values(1, c));
}

TEST(BuildMatrix, AllNanEdaIsEmpty) {
  auto sessions = small_corpus(2, 120);
  for (auto& s : sessions) std::fill(s.channels["EDA"].begin(), s.channels["EDA"].end(), std::nan(""));
  EXPECT_THROW(build_matrix(sessions, FeatureManifest::from_preset("bio-paper")), EmptyMatrixError);
}

TEST(BuildMatrix, PerSubjectZScoreMoments) {
  const auto m = build_matrix(small_corpus(), FeatureManifest::from_preset("fused-paper"));
  for (const auto& subject : m.subjects()) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < m.rows(); ++r)
      if (m.subject_ids[r] == subject) rows.push_back(r);
    const double n = static_cast<double>(rows.size());
    for (std::size_t c = 0; c < m.cols(); ++c) {
      double mean = 0, var = 0;
      for (auto r : rows) mean += m.values(r, c);
      mean /= n;
      for (auto r : rows) var += (m.values(r, c) - mean) * (m.values(r, c) - mean);
      var /= n;
      EXPECT_NEAR(mean, 0.0, 1e-9) << m.feature_names[c];
      if (var > 0) EXPECT_NEAR(std::sqrt(var), 1.0, 1e-9) << m.feature_names[c];
    }
  }
}

TEST(BuildMatrix, SubjectOffsetLeavesShiftEquivariantStatsUnchanged) {
  // Statistics that shift with the data (mean, max, min, quantile) or ignore
  // the shift (spread, shape, counts) are identical after per-subject
  // z-scoring. Energy, RMS and variation depend on the level and are excluded.
  auto shifted = small_corpus();
  for (double& v : shifted[1].channels["HR"]) v += 12.5;
  const auto manifest = FeatureManifest::from_preset("bio-paper");
  const auto a = build_matrix(small_corpus(), manifest);
  const auto b = build_matrix(shifted, manifest);
  for (const char* st : {"avg", "max", "min", "quantile", "std", "variance", "skew", "kurtosis", "autocorr",
                         "fourier_entropy", "above_mean", "below_mean"}) {
    const std::size_t c = column(a, std::string(st) + "_HR");
    for (std::size_t r = 0; r < a.rows(); ++r) EXPECT_NEAR(a.values(r, c), b.values(r, c), 1e-9) << st;
  }
}

TEST(BuildMatrix, DeterministicAndSerialMatchesParallel) {
  const auto sessions = small_corpus(2, 200);
  const auto manifest = FeatureManifest::from_preset("fused-geometry");
  BuildOptions serial;
  serial.parallel = false;
  const auto a = build_matrix(sessions, manifest);
  const auto b = build_matrix(sessions, manifest);
  const auto c = build_matrix(sessions, manifest, serial);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(BuildMatrix, ClassMeansFollowTheGenerator) {
  sigcore::SynthSpec spec;
  spec.n_subjects = 4;
  BuildOptions opt;
  opt.normalize = false;
  const auto m = build_matrix(sigcore::synth_dataset(spec), FeatureManifest::from_preset("bio-paper"), opt);
  auto class_mean = [&](const std::string& name, int cls) {
    const std::size_t c = column(m, name);
    double s = 0, n = 0;
    for (std::size_t r = 0; r < m.rows(); ++r)
      if (m.labels[r] == cls) {
        s += m.values(r, c);
        n += 1;
      }
    return s / n;
  };
  EXPECT_GT(class_mean("avg_HR", 2), class_mean("avg_HR", 0) + 5.0);
  EXPECT_LT(class_mean("avg_TEMP", 2), class_mean("avg_TEMP", 0) - 0.2);
  EXPECT_GT(class_mean("avg_EDA_Tonic", 2), class_mean("avg_EDA_Tonic", 0));
  EXPECT_GT(class_mean("SCR_Peaks", 2), class_mean("SCR_Peaks", 0));
}

TEST(FeatureCsv, RoundTrip) {
  stressfuse::testing::TempDir dir("fcsv");
  const auto m = build_matrix(small_corpus(2, 120), FeatureManifest::from_preset("fused-paper"));
  write_feature_csv(dir / "f.csv", m);
  EXPECT_EQ(read_feature_csv(dir / "f.csv"), m);
}

TEST(FeatureMatrix, ColumnsOfModality) {
  const auto m = build_matrix(small_corpus(2, 120), FeatureManifest::from_preset("fused-paper"));
  EXPECT_EQ(m.columns_of(Modality::kBio).size(), 175u);
  EXPECT_EQ(m.columns_of(Modality::kLandmark).size(), 1904u);
}

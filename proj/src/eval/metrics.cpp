#include <algorithm>
#include <map>

#include "stressfuse/common/error.hpp"
#include "stressfuse/eval/eval.hpp"

namespace stressfuse::eval {
namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

void check_label(int v) {
  if (v < 0 || v >= static_cast<int>(kClasses)) throw LabelError("class label out of range: " + std::to_string(v));
}

}  // namespace

void ConfusionMatrix::add(int truth, int pred) {
  check_label(truth);
  check_label(pred);
  ++counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts)
    for (auto c : row) t += c;
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  for (std::size_t i = 0; i < kClasses; ++i)
    for (std::size_t j = 0; j < kClasses; ++j) counts[i][j] += o.counts[i][j];
  return *this;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) throw LengthError("truth and prediction lengths differ");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], pred[i]);
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  const auto total = static_cast<double>(cm.total());
  if (total == 0.0) throw MetricError("metrics of an empty confusion matrix");
  Metrics m;
  double trace = 0.0;
  for (std::size_t c = 0; c < kClasses; ++c) {
    double col = 0.0, row = 0.0;
    for (std::size_t o = 0; o < kClasses; ++o) {
      col += static_cast<double>(cm.counts[o][c]);
      row += static_cast<double>(cm.counts[c][o]);
    }
    const auto tp = static_cast<double>(cm.counts[c][c]);
    trace += tp;
    m.precision[c] = ratio(tp, col);
    m.recall[c] = ratio(tp, row);
    m.f1[c] = ratio(2.0 * m.precision[c] * m.recall[c], m.precision[c] + m.recall[c]);
    m.macro_precision += m.precision[c] / kClasses;
    m.macro_recall += m.recall[c] / kClasses;
    m.macro_f1 += m.f1[c] / kClasses;
  }
  m.accuracy = trace / total;
  return m;
}

std::array<ClassRates, kClasses> fp_fn_rates(const ConfusionMatrix& cm) {
  const auto total = static_cast<double>(cm.total());
  std::array<ClassRates, kClasses> out{};
  for (std::size_t c = 0; c < kClasses; ++c) {
    double col = 0.0, row = 0.0;
    for (std::size_t o = 0; o < kClasses; ++o) {
      col += static_cast<double>(cm.counts[o][c]);
      row += static_cast<double>(cm.counts[c][o]);
    }
    const auto tp = static_cast<double>(cm.counts[c][c]);
    const double fn = row - tp, fp = col - tp;
    const double tn = total - tp - fn - fp;
    out[c].fn_rate = ratio(fn, tp + fn);
    out[c].fp_rate = ratio(fp, fp + tn);
  }
  return out;
}

std::vector<Fold> loso_folds(std::span<const std::string> subject_ids) {
  std::map<std::string, std::vector<std::size_t>> by_subject;
  for (std::size_t i = 0; i < subject_ids.size(); ++i) by_subject[subject_ids[i]].push_back(i);
  if (by_subject.size() < 2) throw FoldError("leave-one-subject-out needs at least two subjects");
  std::vector<Fold> folds;
  for (const auto& [subject, rows] : by_subject) {
    Fold f;
    f.subject = subject;
    f.test_rows = rows;
    for (std::size_t i = 0; i < subject_ids.size(); ++i) {
      if (subject_ids[i] != subject) f.train_rows.push_back(i);
    }
    folds.push_back(std::move(f));
  }
  return folds;
}

}  // namespace stressfuse::eval

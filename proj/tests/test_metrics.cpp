#include <gtest/gtest.h>

#include "oracles.hpp"
#include "orgbin/eval/metrics.hpp"
#include "support.hpp"

using namespace orgbin;
using namespace orgbin::eval;

namespace {

ConfusionMatrix from_rows(const std::vector<std::vector<std::size_t>>& rows) {
  ConfusionMatrix cm(rows.size());
  for (std::size_t g = 0; g < rows.size(); ++g)
    for (std::size_t p = 0; p < rows.size(); ++p) cm.at(g, p) = rows[g][p];
  return cm;
}

}  // namespace

TEST(Confusion, CountsPairs) {
  std::vector<std::size_t> preds{0, 1, 1, 2}, golds{0, 1, 2, 2};
  auto cm = confusion(preds, golds, 3);
  EXPECT_EQ(cm.at(0, 0), 1u);
  EXPECT_EQ(cm.at(2, 1), 1u);
  EXPECT_EQ(cm.at(2, 2), 1u);
  EXPECT_EQ(cm.total(), 4u);
  EXPECT_EQ(cm.trace(), 3u);
  std::vector<std::size_t> bad{3};
  std::vector<std::size_t> one{0};
  EXPECT_THROW(confusion(bad, one, 3), DataError);
  EXPECT_THROW(confusion({}, {}, 3), DataError);
  EXPECT_THROW(confusion(one, golds, 3), DataError);
}

TEST(Confusion, MatchesBruteForceCount) {
  Rng rng(1);
  std::vector<std::size_t> preds, golds;
  for (int i = 0; i < 200; ++i) {
    preds.push_back(rng.below(5));
    golds.push_back(rng.below(5));
  }
  auto cm = confusion(preds, golds, 5);
  for (std::size_t g = 0; g < 5; ++g)
    for (std::size_t p = 0; p < 5; ++p) {
      std::size_t n = 0;
      for (std::size_t i = 0; i < preds.size(); ++i) n += preds[i] == p && golds[i] == g;
      EXPECT_EQ(cm.at(g, p), n);
    }
}

TEST(Metrics, HandExampleBinary) {
  // Positive class 0: TP 3, FN 2 (gold 0 predicted 1), FP 1, TN 4.
  auto cm = from_rows({{3, 2}, {1, 4}});
  auto pos = class_metrics(cm, 0);
  EXPECT_EQ(pos.tp, 3u);
  EXPECT_EQ(pos.fp, 1u);
  EXPECT_EQ(pos.fn, 2u);
  EXPECT_EQ(pos.tn, 4u);
  EXPECT_DOUBLE_EQ(pos.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(pos.precision, 0.75);
  EXPECT_DOUBLE_EQ(pos.recall, 0.6);
  EXPECT_NEAR(pos.f1, 0.6667, 5e-5);
  EXPECT_DOUBLE_EQ(pos.f1, 2 * 0.75 * 0.6 / (0.75 + 0.6));
  EXPECT_DOUBLE_EQ(metrics(cm).accuracy, 0.7);
}

TEST(Metrics, AllCorrectIsOne) {
  auto m = metrics(from_rows({{4, 0, 0}, {0, 2, 0}, {0, 0, 9}}));
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
}

TEST(Metrics, AbsentGoldClassExcludedFromMacroAverage) {
  // Class 2 never occurs in gold but is predicted once.
  auto m = metrics(from_rows({{2, 0, 1}, {0, 3, 0}, {0, 0, 0}}));
  auto o = orgbin::testing::metrics_oracle({{2, 0, 1}, {0, 3, 0}, {0, 0, 0}});
  EXPECT_DOUBLE_EQ(m.recall, (2.0 / 3.0 + 1.0) / 2.0);
  EXPECT_NEAR(m.precision, o.precision, 1e-15);
  EXPECT_NEAR(m.f1, o.f1, 1e-15);
}

TEST(Metrics, MajorityPredictorScoresClassShare) {
  std::vector<std::size_t> golds, preds;
  std::size_t label = 0;
  for (const auto& [bin, n] : orgbin::testing::reference_class_sizes()) {
    for (std::size_t i = 0; i < n; ++i) golds.push_back(label);
    ++label;
  }
  preds.assign(golds.size(), 0);
  auto m = metrics(confusion(preds, golds, 5));
  EXPECT_NEAR(m.accuracy, 0.3417, 5e-5);
  EXPECT_NEAR(m.recall, 0.2, 1e-15);
}

TEST(Metrics, MatchOracleOnRandomMatrices) {
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 2 + rng.below(6);
    std::vector<std::vector<std::size_t>> rows(k, std::vector<std::size_t>(k));
    for (auto& r : rows)
      for (auto& v : r) v = rng.below(4) == 0 ? 0 : rng.below(50);
    rows[0][0] += 1;
    auto m = metrics(from_rows(rows));
    auto o = orgbin::testing::metrics_oracle(rows);
    EXPECT_NEAR(m.accuracy, o.accuracy, 1e-12);
    EXPECT_NEAR(m.precision, o.precision, 1e-12);
    EXPECT_NEAR(m.recall, o.recall, 1e-12);
    EXPECT_NEAR(m.f1, o.f1, 1e-12);
    for (double v : {m.accuracy, m.precision, m.recall, m.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

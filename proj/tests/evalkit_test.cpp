#include <gtest/gtest.h>

#include <cmath>

#include "snipforge/evalkit.hpp"
#include "snipforge/plot.hpp"
#include "snipforge/rng.hpp"

using namespace snipforge;
using namespace snipforge::evalkit;

namespace {

double mann_whitney(const std::vector<int>& labels, const std::vector<double>& probs) {
  double wins = 0;
  int64_t pairs = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (probs[i] > probs[j]) wins += 1.0;
      else if (probs[i] == probs[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

}  // namespace

TEST(ConfusionCounts, Basic) {
  Confusion c = confusion({1, 0}, {0.9, 0.1});
  EXPECT_EQ(c.tp, 1);
  EXPECT_EQ(c.tn, 1);
  EXPECT_EQ(c.fp, 0);
  EXPECT_EQ(c.fn, 0);
}

TEST(ConfusionCounts, TiesGoPositive) {
  Confusion c = confusion({1, 0, 1}, {0.5, 0.5, 0.5}, 0.5);
  EXPECT_EQ(c.tp, 2);
  EXPECT_EQ(c.fp, 1);
  EXPECT_EQ(c.tn, 0);
  EXPECT_EQ(c.fn, 0);
}

TEST(ConfusionCounts, LengthMismatchRejected) {
  EXPECT_THROW(confusion({1, 0}, {0.5}), std::invalid_argument);
}

TEST(ConfusionCounts, MatchesBruteForceTally) {
  Rng rng(1);
  std::vector<int> labels;
  std::vector<double> probs;
  for (int i = 0; i < 200; ++i) {
    labels.push_back(static_cast<int>(rng.bounded(2)));
    probs.push_back(rng.uniform01());
  }
  double thr = 0.35;
  Confusion c = confusion(labels, probs, thr);
  int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    bool pred = probs[i] >= thr;
    tp += pred && labels[i] == 1;
    fp += pred && labels[i] == 0;
    tn += !pred && labels[i] == 0;
    fn += !pred && labels[i] == 1;
  }
  EXPECT_EQ(c.tp, tp);
  EXPECT_EQ(c.fp, fp);
  EXPECT_EQ(c.tn, tn);
  EXPECT_EQ(c.fn, fn);
  EXPECT_EQ(c.n(), 200);
}

TEST(F1Score, PerfectPrediction) {
  Confusion c;
  c.tp = 10;
  c.tn = 10;
  EXPECT_DOUBLE_EQ(f1(c), 1.0);
}

TEST(F1Score, HandArithmetic) {
  Confusion c;
  c.tp = 2;
  c.fp = 1;
  c.fn = 1;
  EXPECT_NEAR(f1(c), 2.0 / 3.0, 1e-12);
}

TEST(F1Score, AllPositiveOnPaperSplit) {
  // predicting everything positive on a 515/485 split: the constant F1
  // column the reference tables show
  std::vector<int> labels;
  std::vector<double> probs;
  for (int i = 0; i < 515; ++i) {
    labels.push_back(1);
    probs.push_back(0.9);
  }
  for (int i = 0; i < 485; ++i) {
    labels.push_back(0);
    probs.push_back(0.8);
  }
  Confusion c = confusion(labels, probs, 0.5);
  EXPECT_EQ(c.tp, 515);
  EXPECT_EQ(c.fp, 485);
  EXPECT_NEAR(f1(c), 0.680, 0.001);
  EXPECT_NEAR(f1(c), 2.0 * 0.515 / 1.515, 1e-12);
}

TEST(F1Score, DegenerateCountsGiveZero) {
  Confusion c;
  c.tn = 5;
  EXPECT_DOUBLE_EQ(f1(c), 0.0);
}

TEST(RocAuc, PerfectRanking) {
  auto r = roc_auc({1, 1, 0, 0}, {0.9, 0.8, 0.3, 0.1});
  EXPECT_DOUBLE_EQ(r.auc, 1.0);
  EXPECT_EQ(r.points.front(), std::make_pair(0.0, 0.0));
  EXPECT_EQ(r.points.back(), std::make_pair(1.0, 1.0));
}

TEST(RocAuc, ThreeOfFourPairsOrdered) {
  auto r = roc_auc({1, 0, 1, 0}, {0.9, 0.8, 0.3, 0.1});
  EXPECT_NEAR(r.auc, 0.75, 1e-12);
}

TEST(RocAuc, SingleClassRejected) {
  EXPECT_THROW(roc_auc({1, 1}, {0.5, 0.6}), std::invalid_argument);
}

TEST(RocAuc, EqualsMannWhitneyOnRandomInstances) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> labels;
    std::vector<double> probs;
    for (int i = 0; i < 200; ++i) {
      labels.push_back(static_cast<int>(rng.bounded(2)));
      // quantized scores force tie handling
      probs.push_back(static_cast<double>(rng.bounded(20)) / 20.0);
    }
    bool has_pos = false, has_neg = false;
    for (int l : labels) (l ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) continue;
    auto r = roc_auc(labels, probs);
    EXPECT_NEAR(r.auc, mann_whitney(labels, probs), 1e-9) << "trial " << trial;
  }
}

TEST(RocAuc, InvariantUnderMonotoneTransform) {
  Rng rng(9);
  std::vector<int> labels;
  std::vector<double> probs, squashed;
  for (int i = 0; i < 150; ++i) {
    labels.push_back(static_cast<int>(rng.bounded(2)));
    probs.push_back(rng.uniform01());
    squashed.push_back(1.0 / (1.0 + std::exp(-6.0 * (probs.back() - 0.5))));
  }
  EXPECT_NEAR(roc_auc(labels, probs).auc, roc_auc(labels, squashed).auc, 1e-12);
}

TEST(RocAuc, ComplementSymmetryForTieFreeScores) {
  Rng rng(11);
  std::vector<int> labels = {1, 0, 1, 0, 1, 0, 0, 1, 1, 0};
  std::vector<double> probs;
  for (size_t i = 0; i < labels.size(); ++i) probs.push_back((static_cast<double>(i) + rng.uniform01() * 0.5) / 11.0);
  std::vector<double> negated;
  for (double p : probs) negated.push_back(-p);
  EXPECT_NEAR(roc_auc(labels, probs).auc + roc_auc(labels, negated).auc, 1.0, 1e-12);
}

TEST(RocAuc, CurveXNonDecreasing) {
  Rng rng(13);
  std::vector<int> labels;
  std::vector<double> probs;
  for (int i = 0; i < 100; ++i) {
    labels.push_back(static_cast<int>(rng.bounded(2)));
    probs.push_back(static_cast<double>(rng.bounded(10)) / 10.0);
  }
  auto r = roc_auc(labels, probs);
  for (size_t i = 1; i < r.points.size(); ++i) EXPECT_GE(r.points[i].first, r.points[i - 1].first);
}

TEST(PrAuc, PerfectRanking) {
  auto r = pr_auc({1, 1, 0, 0}, {0.9, 0.8, 0.3, 0.1});
  EXPECT_DOUBLE_EQ(r.auc, 1.0);
  EXPECT_DOUBLE_EQ(r.points.back().first, 1.0);  // recall reaches 1
}

TEST(PrAuc, HandBuiltInstanceMatchesEnumeratedOracle) {
  // thresholds .9/.8/.3/.1 give (P,R) = (1,.5) (.5,.5) (2/3,1) (.5,1);
  // with the recall-0 anchor the trapezoid area is 19/24
  auto r = pr_auc({1, 0, 1, 0}, {0.9, 0.8, 0.3, 0.1});
  EXPECT_NEAR(r.auc, 19.0 / 24.0, 1e-12);
  std::vector<std::pair<double, double>> expect = {{0.0, 1.0}, {0.5, 1.0}, {0.5, 0.5}, {1.0, 2.0 / 3.0}, {1.0, 0.5}};
  ASSERT_EQ(r.points.size(), expect.size());
  for (size_t i = 0; i < expect.size(); ++i) {
    EXPECT_NEAR(r.points[i].first, expect[i].first, 1e-12);
    EXPECT_NEAR(r.points[i].second, expect[i].second, 1e-12);
  }
}

TEST(PrAuc, RandomScoresNearPrevalence) {
  Rng rng(17);
  std::vector<int> labels;
  std::vector<double> probs;
  for (int i = 0; i < 10000; ++i) {
    labels.push_back(i % 2);
    probs.push_back(rng.uniform01());
  }
  auto r = pr_auc(labels, probs);
  EXPECT_NEAR(r.auc, 0.5, 0.05);
}

TEST(PrAuc, NoPositivesRejected) {
  EXPECT_THROW(pr_auc({0, 0}, {0.5, 0.6}), std::invalid_argument);
}

TEST(Report, ArithmeticCloses) {
  Rng rng(19);
  std::vector<int> labels;
  std::vector<double> probs;
  for (int i = 0; i < 300; ++i) {
    labels.push_back(static_cast<int>(rng.bounded(2)));
    probs.push_back(rng.uniform01());
  }
  MetricsReport r = metrics_report(labels, probs, 0.7);
  EXPECT_EQ(r.confusion.tp + r.confusion.fp + r.confusion.tn + r.confusion.fn, r.n);
  EXPECT_NEAR(r.accuracy,
              static_cast<double>(r.confusion.tp + r.confusion.tn) / static_cast<double>(r.n), 1e-12);
  nlohmann::json j = r.to_json();
  for (const char* key : {"loss", "accuracy", "f1", "auc_roc", "auc_pr", "confusion", "n"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Svg, LinePlotSmoke) {
  plot::Series s;
  s.name = "loss";
  s.points = {{1, 2.0}, {2, 1.4}, {3, 1.1}};
  std::string svg = plot::line_plot("training loss", "epoch", "loss", {s});
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Svg, ScatterAndBarsSmoke) {
  std::string sc = plot::scatter_plot("pca", {{0.1, 0.2, "tok"}, {-1, 2, "x"}});
  EXPECT_NE(sc.find("circle"), std::string::npos);
  std::string bars = plot::bar_chart("apis", {{"numpy", 10}, {"os", 5}});
  EXPECT_NE(bars.find("rect"), std::string::npos);
}

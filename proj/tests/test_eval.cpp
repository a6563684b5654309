#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "toxpipe/eval.hpp"

using namespace toxpipe;

namespace {

ConfusionMatrix from_counts(std::array<std::array<std::size_t, 3>, 3> counts) {
  ConfusionMatrix cm;
  cm.counts = counts;
  return cm;
}

}  // namespace

TEST(Confusion, Examples) {
  const std::vector<int> ids{0, 1, 2};
  const auto cm = confusion(ids, ids);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(cm.counts[i][j], i == j ? 1u : 0u);
  const std::vector<int> p{1}, l{0};
  EXPECT_EQ(confusion(p, l).counts[0][1], 1u);
}

TEST(Confusion, Errors) {
  const std::vector<int> a{0, 1}, b{0}, empty, bad{3};
  EXPECT_THROW(confusion(a, b), std::invalid_argument);
  EXPECT_THROW(confusion(empty, empty), std::invalid_argument);
  EXPECT_THROW(confusion(bad, b), std::invalid_argument);
}

TEST(Confusion, MassAndOrderInvariance) {
  std::mt19937_64 rng(1);
  std::vector<int> p(100), l(100);
  for (int i = 0; i < 100; ++i) {
    p[i] = int(rng() % 3);
    l[i] = int(rng() % 3);
  }
  const auto cm = confusion(p, l);
  EXPECT_EQ(cm.total(), 100u);
  std::vector<std::size_t> order(100);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> p2, l2;
  for (auto i : order) {
    p2.push_back(p[i]);
    l2.push_back(l[i]);
  }
  EXPECT_EQ(confusion(p2, l2).counts, cm.counts);
}

TEST(Metrics, PerfectDiagonal) {
  const auto m = metrics(from_counts({{{4, 0, 0}, {0, 5, 0}, {0, 0, 6}}}));
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  for (const auto& c : m.per_class) EXPECT_DOUBLE_EQ(c.f1, 1.0);
}

TEST(Metrics, AllMassOffDiagonal) {
  const auto m = metrics(from_counts({{{0, 7, 0}, {0, 0, 0}, {0, 0, 0}}}));
  EXPECT_DOUBLE_EQ(m.accuracy, 0.0);
  EXPECT_DOUBLE_EQ(m.per_class[1].precision, 0.0);
  EXPECT_FALSE(m.per_class[1].precision_undefined);
  EXPECT_TRUE(m.per_class[1].recall_undefined);
  EXPECT_TRUE(m.per_class[0].precision_undefined);
  EXPECT_DOUBLE_EQ(m.per_class[0].recall, 0.0);
}

TEST(Metrics, HandArithmetic) {
  const auto m = metrics(from_counts({{{5, 1, 0}, {2, 8, 0}, {0, 0, 4}}}));
  EXPECT_DOUBLE_EQ(m.accuracy, 17.0 / 20.0);
  EXPECT_DOUBLE_EQ(m.per_class[0].precision, 5.0 / 7.0);
  EXPECT_DOUBLE_EQ(m.per_class[0].recall, 5.0 / 6.0);
  const double p = 8.0 / 9.0, r = 8.0 / 10.0;
  EXPECT_NEAR(m.per_class[1].f1, 2 * p * r / (p + r), 1e-12);
}

TEST(Metrics, RangesOnRandomMatrices) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    ConfusionMatrix cm;
    for (auto& row : cm.counts)
      for (auto& c : row) c = rng() % 6;
    cm.counts[rng() % 3][rng() % 3] += 1;
    const auto m = metrics(cm);
    EXPECT_GE(m.accuracy, 0.0);
    EXPECT_LE(m.accuracy, 1.0);
    for (const auto& c : m.per_class)
      for (double v : {c.precision, c.recall, c.f1}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
  }
}

TEST(ExpectedCost, Examples) {
  const CostMatrix costs = CostMatrix::from_binary(5, 10);
  EXPECT_DOUBLE_EQ(expected_cost(from_counts({{{3, 0, 0}, {0, 4, 0}, {0, 0, 5}}}), costs), 0.0);
  // One acceptable tweet (class 2) flagged as hate.
  EXPECT_DOUBLE_EQ(expected_cost(from_counts({{{0, 0, 0}, {0, 0, 0}, {1, 0, 0}}}), costs), 5.0);
  // Two missed hate tweets and one false alarm.
  EXPECT_DOUBLE_EQ(expected_cost(from_counts({{{0, 2, 0}, {1, 0, 0}, {0, 0, 0}}}), costs), 25.0);
}

TEST(ExpectedCost, BinaryCostLayout) {
  const CostMatrix c = CostMatrix::from_binary(5, 10);
  EXPECT_EQ(c.costs[0][0], 0.0);
  EXPECT_EQ(c.costs[0][1], 10.0);
  EXPECT_EQ(c.costs[0][2], 10.0);
  EXPECT_EQ(c.costs[1][0], 5.0);
  EXPECT_EQ(c.costs[2][0], 5.0);
  EXPECT_EQ(c.costs[1][2], 0.0);
  EXPECT_EQ(c.costs[2][1], 0.0);
}

TEST(ExpectedCost, LinearInCosts) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 10);
  for (int t = 0; t < 50; ++t) {
    ConfusionMatrix cm;
    CostMatrix c;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        cm.counts[i][j] = rng() % 20;
        c.costs[i][j] = u(rng);
      }
    CostMatrix scaled = c;
    const double alpha = u(rng);
    for (auto& row : scaled.costs)
      for (auto& v : row) v *= alpha;
    EXPECT_NEAR(expected_cost(cm, scaled), alpha * expected_cost(cm, c), 1e-9);
  }
}

TEST(BinaryView, CollapsesAcceptableClasses) {
  const auto b = binary_view(from_counts({{{3, 1, 2}, {4, 5, 6}, {7, 8, 9}}}));
  EXPECT_EQ(b.true_positive, 3u);
  EXPECT_EQ(b.false_negative, 3u);
  EXPECT_EQ(b.false_positive, 11u);
  EXPECT_EQ(b.true_negative, 28u);
}

TEST(EvalJson, CostMatrixRoundTripAndCsv) {
  CostMatrix c = CostMatrix::from_binary(2, 7);
  c.costs[1][2] = 0.5;
  const CostMatrix back = nlohmann::json(c).get<CostMatrix>();
  EXPECT_EQ(back.costs, c.costs);
  std::ostringstream out;
  write_confusion_csv(out, from_counts({{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}}}));
  EXPECT_EQ(out.str(),
            "true\\pred,hate,offensive,neither\nhate,1,2,3\noffensive,4,5,6\nneither,7,8,9\n");
  const auto m = nlohmann::json(metrics(from_counts({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}})));
  EXPECT_DOUBLE_EQ(m["accuracy"].get<double>(), 1.0);
}

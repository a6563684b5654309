#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "toxpipe/nn/adam.hpp"

using namespace toxpipe::nn;

namespace {

// Scalar reference implementation used as an oracle.
struct ScalarAdam {
  double lr, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double m = 0, v = 0;
  int t = 0;
  double step(double theta, double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    return theta - lr * mhat / (std::sqrt(vhat) + eps);
  }
};

}  // namespace

TEST(Adam, ZeroGradientIsIdentity) {
  Param<double> p("p", 2, 3);
  p.value.setRandom();
  const auto before = p.value;
  AdamState<double> state({&p}, AdamConfig{0.1});
  for (int i = 0; i < 10; ++i) adam_step<double>({&p}, state);
  EXPECT_EQ(p.value, before);
  EXPECT_TRUE(state.m[0].isZero(0));
  EXPECT_TRUE(state.v[0].isZero(0));
  EXPECT_EQ(state.step, 10u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Param<double> p("p", 1, 3);
  p.value << 1.0, 1.0, 1.0;
  p.grad << 0.5, -3.0, 1e-3;
  AdamState<double> state({&p}, AdamConfig{0.01});
  adam_step<double>({&p}, state);
  EXPECT_NEAR(p.value(0, 0), 1.0 - 0.01, 1e-8);
  EXPECT_NEAR(p.value(0, 1), 1.0 + 0.01, 1e-8);
  EXPECT_NEAR(p.value(0, 2), 1.0 - 0.01, 1e-7);
}

TEST(Adam, ProportionalHistoriesGiveEqualSteps) {
  Param<double> a("a", 1, 1), b("b", 1, 1);
  AdamState<double> state({&a, &b}, AdamConfig{0.001});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 1);
  for (int i = 0; i < 100; ++i) {
    const double before_a = a.value(0, 0), before_b = b.value(0, 0);
    const double x = g(rng);
    a.grad(0, 0) = x;
    b.grad(0, 0) = 2 * x;
    adam_step<double>({&a, &b}, state);
    EXPECT_NEAR(std::abs(a.value(0, 0) - before_a), std::abs(b.value(0, 0) - before_b), 1e-9);
  }
}

TEST(Adam, MatchesScalarOracle) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 1);
  Param<double> p("p", 3, 2);
  for (Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = g(rng);
  std::vector<ScalarAdam> oracle(6, ScalarAdam{0.003});
  std::vector<double> expected(p.value.data(), p.value.data() + 6);
  AdamState<double> state({&p}, AdamConfig{0.003});
  for (int step = 0; step < 50; ++step) {
    for (Index i = 0; i < 6; ++i) {
      p.grad.data()[i] = g(rng);
      expected[i] = oracle[i].step(expected[i], p.grad.data()[i]);
    }
    adam_step<double>({&p}, state);
    for (Index i = 0; i < 6; ++i) EXPECT_NEAR(p.value.data()[i], expected[i], 1e-12);
  }
}

TEST(Adam, FrozenParamsUntouched) {
  Param<float> frozen("f", 2, 2), live("l", 2, 2);
  frozen.trainable = false;
  frozen.grad.setOnes();
  live.grad.setOnes();
  AdamState<float> state({&frozen, &live}, AdamConfig{});
  adam_step<float>({&frozen, &live}, state);
  EXPECT_TRUE(frozen.value.isZero(0));
  EXPECT_FALSE(live.value.isZero(0));
}

TEST(Adam, StateMismatchThrows) {
  Param<double> a("a", 1, 1), b("b", 1, 1);
  AdamState<double> state({&a}, AdamConfig{});
  EXPECT_THROW(adam_step<double>({&a, &b}, state), std::invalid_argument);
  a.grad = Matrix<double>::Zero(2, 2);
  EXPECT_THROW(adam_step<double>({&a}, state), std::invalid_argument);
}

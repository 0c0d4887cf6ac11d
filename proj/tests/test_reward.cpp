// Copyright 2026 The pianorl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pianorl/reward.hpp"

namespace pianorl {
namespace {

KeySnapshot snapshot(std::initializer_list<int> targets, std::initializer_list<int> pressed,
                     double mu_pressed = 1.0) {
  KeySnapshot s;
  for (int k : targets) s.targets[static_cast<std::size_t>(k)] = true;
  for (int k : pressed) {
    s.pressed[static_cast<std::size_t>(k)] = true;
    s.mu[static_cast<std::size_t>(k)] = mu_pressed;
  }
  return s;
}

TEST(Energy, FormulaAndSign) {
  JointTorques tau;
  JointVector v{};
  EXPECT_EQ(r_energy(tau, v, 0.12), 0.0);
  tau.tau[0] = 2.0;
  v[0] = 0.5;
  EXPECT_DOUBLE_EQ(r_energy(tau, v, 0.12), -2.0 * 0.5 * 0.12);
  tau.tau[5] = -1.0;
  v[5] = 3.0;
  EXPECT_DOUBLE_EQ(r_energy(tau, v, 0.12), -(1.0 + 3.0) * 0.12);
  EXPECT_LT(r_energy(tau, v, 0.12), 0.0);
}

TEST(Tolerance, ShapeContract) {
  const ToleranceShape shape;
  EXPECT_EQ(tolerance(0.0, shape), 1.0);
  EXPECT_EQ(tolerance(shape.bound, shape), 1.0);
  EXPECT_NEAR(tolerance(shape.bound + shape.margin, shape), shape.value_at_margin, 1e-15);
  EXPECT_NEAR(tolerance(shape.bound + 1e-12, shape), 1.0, 1e-9);  // continuous at the bound
  double prev = tolerance(shape.bound, shape);
  for (int i = 1; i <= 100; ++i) {
    const double d = shape.bound + 0.005 * i;
    const double v = tolerance(d, shape);
    EXPECT_LT(v, prev) << d;
    EXPECT_GT(v, 0.0);
    prev = v;
  }
}

TEST(HandPosition, AveragesOverTargets) {
  const ToleranceShape shape;
  HandGeometry g;
  g.palm_position = {0.3, 0.04};
  EXPECT_EQ(r_hand_position(g, shape), 1.0);  // no targets
  g.target_key_positions = {{0.3, 0.04}};
  EXPECT_EQ(r_hand_position(g, shape), 1.0);
  g.target_key_positions = {{0.3 + 0.005, 0.04}, {0.3 + shape.bound + shape.margin, 0.04}};
  EXPECT_NEAR(r_hand_position(g, shape), (1.0 + shape.value_at_margin) / 2.0, 1e-12);
}

TEST(Keypress, AppendixCases) {
  EXPECT_EQ(r_keypress(snapshot({24}, {})), 0.0);
  // Wrong key pressed while the target rests.
  EXPECT_NEAR(r_keypress(snapshot({24}, {30})), 0.5, 1e-12);
  EXPECT_NEAR(r_keypress(snapshot({24}, {24})), 1.5, 1e-12);
  EXPECT_NEAR(r_keypress(snapshot({}, {30}, 0.25)), 1.5, 1e-12);
  EXPECT_EQ(r_keypress(snapshot({}, {})), 2.0);
}

TEST(Keypress, BinaryTargetStateVariant) {
  auto s = snapshot({24, 26}, {24}, 0.6);
  EXPECT_NEAR(r_keypress(s, false), 1.0 + 0.5 * 0.3, 1e-12);
  EXPECT_NEAR(r_keypress(s, true), 1.0 + 0.5 * 0.5, 1e-12);
}

TEST(Keypress, CaseOrderingProperty) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> key(0, kNumKeys - 1);
  for (int i = 0; i < 10000; ++i) {
    KeySnapshot correct;
    const int n_targets = 1 + static_cast<int>(u(rng) * 4);
    for (int j = 0; j < n_targets; ++j) {
      const auto k = static_cast<std::size_t>(key(rng));
      correct.targets[k] = true;
      correct.mu[k] = u(rng);
    }
    const auto first = static_cast<std::size_t>(key_indices(correct.targets).front());
    correct.pressed[first] = true;
    KeySnapshot wrong = correct;
    std::size_t w;
    do w = static_cast<std::size_t>(key(rng)); while (wrong.targets[w]);
    wrong.pressed[w] = true;
    wrong.mu[w] = u(rng);
    KeySnapshot none = correct;
    none.pressed = {};
    const double r3 = r_keypress(correct);
    const double r2 = r_keypress(wrong);
    EXPECT_EQ(r3 - r2, 0.5);
    EXPECT_GT(r2, 0.0);
    EXPECT_EQ(r_keypress(none), 0.0);
  }
}

TEST(Keypress, RangeAndPermutationInvariance) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    KeySnapshot s;
    for (std::size_t k = 0; k < kNumKeys; ++k) {
      s.targets[k] = u(rng) < 0.1;
      s.mu[k] = u(rng) < 0.2 ? u(rng) : 0.0;
      s.pressed[k] = s.mu[k] >= 0.5;
    }
    const double r = r_keypress(s);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 2.0);
    // Reversing key order keeps every class statistic, so the reward is unchanged.
    KeySnapshot rev = s;
    std::reverse(rev.mu.begin(), rev.mu.end());
    std::reverse(rev.pressed.begin(), rev.pressed.end());
    std::reverse(rev.targets.begin(), rev.targets.end());
    EXPECT_NEAR(r_keypress(rev), r, 1e-12);
  }
}

TEST(Sliding, FormulaAndSymmetry) {
  EXPECT_EQ(r_sliding(0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(r_sliding(2, 0.5), -1.5);
  EXPECT_DOUBLE_EQ(r_sliding(1, 1.0), -3.0);
  for (double v : {0.1, 0.7, 2.0}) {
    EXPECT_EQ(r_sliding(2, v), r_sliding(2, -v));
    EXPECT_NEAR(r_sliding(1, 3.0 * v), 9.0 * r_sliding(1, v), 1e-12);
    EXPECT_LE(r_sliding(1, v), 0.0);
  }
}

TEST(Sliding, AdjacencyLambda) {
  EXPECT_EQ(adjacency_lambda({}), 0);
  EXPECT_EQ(adjacency_lambda(keys_from_indices(std::vector<int>{3, 5})), 1);
  EXPECT_EQ(adjacency_lambda(keys_from_indices(std::vector<int>{3, 4})), 2);
  EXPECT_EQ(adjacency_lambda(keys_from_indices(std::vector<int>{47, 48})), 2);
  EXPECT_EQ(adjacency_lambda(keys_from_indices(std::vector<int>{0})), 1);
}

TEST(Combine, TotalIsExactSum) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double e = -std::abs(u(rng)), h = std::abs(u(rng)) / 2, k = std::abs(u(rng)),
                 s = -std::abs(u(rng));
    const auto r = combine(e, h, k, s);
    EXPECT_EQ(r.total, e + h + k + s);
    EXPECT_EQ(r.energy, e);
    EXPECT_EQ(r.sliding, s);
  }
}

}  // namespace
}  // namespace pianorl

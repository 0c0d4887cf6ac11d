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

#include <cmath>
#include <random>
#include <sstream>

#include "pianorl/error.hpp"
#include "pianorl/physics.hpp"

namespace pianorl {
namespace {

using geometry::kWhiteKeyWidth;

JointVector press_with(int finger, const JointVector& base) {
  JointVector t = base;
  t[static_cast<std::size_t>(3 * finger + 1)] = 1.0;
  t[static_cast<std::size_t>(3 * finger + 2)] = 1.0;
  return t;
}

std::vector<PlantState> simulate(PlantState s, const JointVector& target, const PhysicalParams& p,
                                 int steps) {
  std::vector<PlantState> out;
  for (int i = 0; i < steps; ++i) {
    s = step(s, target, p).state;
    out.push_back(s);
  }
  return out;
}

TEST(KeyGeometry, WhiteAndBlackLayout) {
  // C D E F G A B per octave are white; index 1, 3, 6, 8, 10 black.
  for (int k : {0, 2, 4, 5, 7, 9, 11, 24, 48}) EXPECT_FALSE(is_black_key(k)) << k;
  for (int k : {1, 3, 6, 8, 10, 25, 46}) EXPECT_TRUE(is_black_key(k)) << k;
  EXPECT_DOUBLE_EQ(key_center_x(24), 14 * kWhiteKeyWidth);
  EXPECT_DOUBLE_EQ(key_center_x(48), 28 * kWhiteKeyWidth);
  for (int k = 0; k + 1 < kNumKeys; ++k) {
    EXPECT_LE(key_contact_interval(k).second, key_contact_interval(k + 1).first + 1e-15) << k;
  }
}

TEST(ForwardKinematics, ReferencePoseAboveFirstWhiteKeys) {
  const auto p = nominal_params();
  const auto pose = forward_kinematics(reference_state(0.0).q, p);
  const int white_keys[] = {0, 2, 4, 5};
  for (int f = 0; f < kNumFingers; ++f) {
    const auto& tip = pose[static_cast<std::size_t>(f)];
    EXPECT_DOUBLE_EQ(tip.x, key_center_x(white_keys[f]));
    EXPECT_GT(tip.z, 0.0);
  }
}

TEST(ForwardKinematics, SliderTranslatesRigidly) {
  const auto p = nominal_params();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  JointVector q{};
  for (int j = 0; j < kNumHandJoints; ++j) q[static_cast<std::size_t>(j)] = u(rng);
  q[kSliderJoint] = 0.1;
  const auto a = forward_kinematics(q, p);
  q[kSliderJoint] += kWhiteKeyWidth;
  const auto b = forward_kinematics(q, p);
  for (int f = 0; f < kNumFingers; ++f) {
    EXPECT_NEAR(b[static_cast<std::size_t>(f)].x - a[static_cast<std::size_t>(f)].x, kWhiteKeyWidth, 1e-15);
    EXPECT_EQ(b[static_cast<std::size_t>(f)].z, a[static_cast<std::size_t>(f)].z);
  }
}

TEST(ForwardKinematics, FlexedFingerReachesBelowKeyTop) {
  // z = (0.14 - 0.10) - 0.045 sin(1) - 0.035 sin(2), evaluated by hand: about -0.0297 m.
  const auto p = nominal_params();
  const auto q = press_with(1, reference_state(0.0).q);
  const auto pose = forward_kinematics(q, p);
  const double expected = 0.04 - 0.045 * std::sin(1.0) - 0.035 * std::sin(2.0);
  EXPECT_NEAR(pose[1].z, expected, 1e-12);
  EXPECT_LT(pose[1].z, 0.0);
  EXPECT_GT(pose[0].z, 0.0);
}

TEST(Step, HoldingPoseWithoutContactIsStatic) {
  const auto p = nominal_params();
  PlantState s = reference_state(0.2);
  s.mu[10] = 0.3;
  const auto next = step(s, s.q, p);
  EXPECT_EQ(next.state.q, s.q);
  EXPECT_EQ(next.state.qdot, s.qdot);
  for (double tau : next.torques.tau) EXPECT_EQ(tau, 0.0);
  EXPECT_LT(next.state.mu[10], 0.3);
  EXPECT_DOUBLE_EQ(next.state.sim_time, kPhysicsDt);
}

TEST(Step, SustainedPressCrossesThreshold) {
  const auto p = nominal_params();
  const PlantState s0 = reference_state(12 * kWhiteKeyWidth);
  const auto traj = simulate(s0, press_with(2, s0.q), p, 100);
  const double mu_end = traj.back().mu[24];
  EXPECT_GT(mu_end, p.key_press_threshold);
  EXPECT_TRUE(pressed_keys(traj.back(), p)[24]);
  // Only the key under finger 2 moves.
  for (int k = 0; k < kNumKeys; ++k) {
    if (k != 24) EXPECT_EQ(traj.back().mu[static_cast<std::size_t>(k)], 0.0) << k;
  }
  // Settled: the last 10 ms change little.
  EXPECT_NEAR(traj.back().mu[24], traj[traj.size() - 3].mu[24], 0.02);
}

TEST(Step, AdjacentKeysPressIndependently) {
  const auto p = nominal_params();
  const PlantState s0 = reference_state(12 * kWhiteKeyWidth);
  const auto both = simulate(s0, press_with(3, press_with(2, s0.q)), p, 100);
  const auto only2 = simulate(s0, press_with(2, s0.q), p, 100);
  const auto only3 = simulate(s0, press_with(3, s0.q), p, 100);
  for (std::size_t i = 0; i < both.size(); ++i) {
    EXPECT_EQ(both[i].mu[24], only2[i].mu[24]);
    EXPECT_EQ(both[i].mu[26], only3[i].mu[26]);
  }
  EXPECT_GT(both.back().mu[24], p.key_press_threshold);
  EXPECT_GT(both.back().mu[26], p.key_press_threshold);
}

TEST(Step, DeterministicTrajectories) {
  const auto p = nominal_params();
  std::mt19937_64 rng(5);
  const auto& lim = joint_limits();
  std::vector<JointVector> actions(300);
  for (auto& a : actions) {
    for (int j = 0; j < kNumJoints; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      a[jj] = std::uniform_real_distribution<double>(lim.lower[jj], lim.upper[jj])(rng);
    }
  }
  auto run = [&] {
    PlantState s = reference_state(p.hand_start_slider);
    std::vector<PlantState> out;
    for (const auto& a : actions) {
      s = step(s, a, p).state;
      out.push_back(s);
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Step, StateStaysInBoundsUnderRandomActions) {
  const auto p = nominal_params();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> wide(-3.0, 3.0);
  const auto& lim = joint_limits();
  PlantState s = reference_state(p.hand_start_slider);
  double max_speed = 0.0;
  for (int i = 0; i < 100000; ++i) {
    JointVector a;
    for (auto& v : a) v = wide(rng);
    if (i % 50 == 0) a[kSliderJoint] = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
    s = step(s, a, p).state;
    for (int j = 0; j < kNumJoints; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      ASSERT_GE(s.q[jj], lim.lower[jj]);
      ASSERT_LE(s.q[jj], lim.upper[jj]);
      max_speed = std::max(max_speed, std::abs(s.qdot[jj]));
    }
    for (double m : s.mu) {
      ASSERT_GE(m, 0.0);
      ASSERT_LE(m, 1.0);
    }
  }
  EXPECT_LT(max_speed, 1e3);
}

TEST(Step, ReleasedKeysDecayMonotonically) {
  const auto p = nominal_params();
  PlantState s = reference_state(0.0);
  for (int k = 0; k < kNumKeys; ++k) s.mu[static_cast<std::size_t>(k)] = (k % 7) / 7.0;
  for (int i = 0; i < 400; ++i) {
    const PlantState next = step(s, s.q, p).state;
    for (std::size_t k = 0; k < kNumKeys; ++k) ASSERT_LE(next.mu[k], s.mu[k]);
    s = next;
  }
  for (double m : s.mu) EXPECT_LT(m, 1e-3);
}

TEST(Step, TranslationEquivarianceWhiteToWhite) {
  // Finger 0 centred on E (index 4), then the whole hand one key width up on F (index 5).
  const auto p = nominal_params();
  const double e_x = key_center_x(4);
  const PlantState a0 = reference_state(e_x);
  const PlantState b0 = reference_state(e_x + kWhiteKeyWidth);
  ASSERT_DOUBLE_EQ(key_center_x(5), e_x + kWhiteKeyWidth);
  auto ta = press_with(0, a0.q);
  auto tb = press_with(0, b0.q);
  const auto a = simulate(a0, ta, p, 200);
  const auto b = simulate(b0, tb, p, 200);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].mu[4], b[i].mu[5]) << i;
    ASSERT_EQ(a[i].mu[5], b[i].mu[6]) << i;
  }
  EXPECT_GT(a.back().mu[4], p.key_press_threshold);
}

TEST(Step, NonFiniteStateIsIntegrationFault) {
  const auto p = nominal_params();
  PlantState s = reference_state(0.1);
  s.qdot[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(step(s, s.q, p), NumericalFault);
}

TEST(PressedKeys, ClosedThresholdBoundary) {
  const auto p = nominal_params();
  PlantState s;
  EXPECT_TRUE(key_indices(pressed_keys(s, p)).empty());
  s.mu[10] = p.key_press_threshold;
  EXPECT_EQ(key_indices(pressed_keys(s, p)), std::vector<int>{10});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    for (auto& m : s.mu) m = u(rng);
    const auto pressed = pressed_keys(s, p);
    for (std::size_t k = 0; k < kNumKeys; ++k) EXPECT_EQ(pressed[k], s.mu[k] >= p.key_press_threshold);
  }
}

TEST(PhysicalParams, ValidationRejectsBadValues) {
  EXPECT_NO_THROW(validate(nominal_params()));
  auto p = nominal_params();
  p.key_press_threshold = 1.0;
  EXPECT_THROW(validate(p), ConfigError);
  p = nominal_params();
  p.joint_damping[3] = 0.0;
  EXPECT_THROW(validate(p), ConfigError);
  p = nominal_params();
  p.hand_start_slider = 1.0;
  EXPECT_THROW(validate(p), ConfigError);
}

TEST(Constants, RoundTripAndVersionCheck) {
  auto p = nominal_params();
  p.joint_damping[4] = 0.125;
  p.piano_height = 0.0987654321;
  EXPECT_EQ(parse_constants(render_constants(p)), p);
  EXPECT_NE(params_hash(p), params_hash(nominal_params()));
  std::string text = render_constants(p);
  const auto pos = text.find("version = 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 11, "version = 9");
  EXPECT_THROW(parse_constants(text), ConfigError);
}

TEST(Constants, ShippedFileMatchesNominal) {
  const auto path = std::filesystem::path(PIANORL_DATA_DIR) / "physics_constants_v1.ini";
  EXPECT_EQ(load_constants(path), nominal_params());
}

TEST(Trajectory, CsvHasHeaderAndOneRowPerState) {
  const auto p = nominal_params();
  const auto traj = simulate(reference_state(0.1), press_with(0, reference_state(0.1).q), p, 5);
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  const std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
  EXPECT_EQ(text.rfind("t,q0,", 0), 0u);
}

}  // namespace
}  // namespace pianorl

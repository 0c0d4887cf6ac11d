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

#include <random>
#include <sstream>

#include <json.hpp>

#include "pianorl/env.hpp"
#include "pianorl/error.hpp"

namespace pianorl {
namespace {

const std::filesystem::path kSongs = std::filesystem::path(PIANORL_DATA_DIR) / "songs";
const char* const kFixtures[] = {"toy.txt", "c_major.txt", "d_major.txt", "twinkle.txt",
                                 "chords.txt"};

PolicyFn random_policy(std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng](const Observation&) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Action a;
    for (auto& x : a) x = u(*rng);
    return a;
  };
}

bool binary_segments(const Observation& obs) {
  for (std::size_t i = Observation::kPressedOffset; i < Observation::kSize; ++i) {
    if (obs.data[i] != 0.0 && obs.data[i] != 1.0) return false;
  }
  return true;
}

TEST(Observation, LayoutMatchesTable) {
  EXPECT_EQ(Observation::kSize, 356u);
  EXPECT_EQ(Observation::kJointsOffset, 0u);
  EXPECT_EQ(Observation::kSliderOffset, 12u);
  EXPECT_EQ(Observation::kPressedOffset, 13u);
  EXPECT_EQ(Observation::kIntendedOffset, 62u);
  EXPECT_EQ(Observation::kFutureOffset, 111u);
  EXPECT_EQ(Observation::kFutureOffset + 245, Observation::kSize);
  Observation obs;
  EXPECT_EQ(obs.joints().size(), 12u);
  EXPECT_EQ(obs.pressed().size(), 49u);
  EXPECT_EQ(obs.intended().size(), 49u);
  EXPECT_EQ(obs.future().size(), 245u);
}

TEST(Observation, SegmentsMatchOracles) {
  const auto song = load_song(kSongs / "twinkle.txt");
  PlantState s = reference_state(0.25);
  s.q[4] = 0.3;
  s.mu[24] = 0.9;
  s.mu[30] = 0.2;
  const auto p = nominal_params();
  for (std::size_t t = 0; t < song.size(); ++t) {
    const auto obs = build_observation(s, p, song, t);
    for (int j = 0; j < 12; ++j) EXPECT_EQ(obs.joints()[static_cast<std::size_t>(j)], s.q[static_cast<std::size_t>(j)]);
    EXPECT_EQ(obs.slider(), 0.25);
    const auto pressed = pressed_keys(s, p);
    const auto future = lookahead(song, t, 5);
    for (std::size_t k = 0; k < kNumKeys; ++k) {
      EXPECT_EQ(obs.pressed()[k], pressed[k] ? 1.0 : 0.0);
      EXPECT_EQ(obs.intended()[k], song.at(t)[k] ? 1.0 : 0.0);
    }
    for (std::size_t i = 0; i < future.size(); ++i) EXPECT_EQ(obs.future()[i], future[i] ? 1.0 : 0.0);
    EXPECT_TRUE(binary_segments(obs));
  }
}

TEST(Action, AffineMappingOntoLimits) {
  const auto& lim = joint_limits();
  Action lo, hi, mid;
  lo.fill(-1.0);
  hi.fill(1.0);
  mid.fill(0.0);
  const auto tl = action_to_targets(lo), th = action_to_targets(hi), tm = action_to_targets(mid);
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    EXPECT_EQ(tl[j], lim.lower[j]);
    EXPECT_EQ(th[j], lim.upper[j]);
    EXPECT_NEAR(tm[j], 0.5 * (lim.lower[j] + lim.upper[j]), 1e-15);
  }
  Action wild;
  wild.fill(7.0);
  wild[3] = std::numeric_limits<double>::quiet_NaN();
  const auto c = clamp_action(wild);
  EXPECT_EQ(c[0], 1.0);
  EXPECT_EQ(c[3], 0.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Action a;
    for (auto& x : a) x = u(rng);
    const auto back = targets_to_action(action_to_targets(a));
    for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(back[j], a[j], 1e-12);
  }
}

TEST(Env, ResetIsDeterministicAndAtRest) {
  const auto song = load_song(kSongs / "c_major.txt");
  PianoEnv env(song);
  auto p = nominal_params();
  p.hand_start_slider = 0.2;
  const auto a = env.reset(p, 5);
  const auto b = env.reset(p, 5);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.slider(), 0.2);
  for (double v : a.pressed()) EXPECT_EQ(v, 0.0);
  for (std::size_t k = 0; k < kNumKeys; ++k) EXPECT_EQ(a.intended()[k], song.at(0)[k] ? 1.0 : 0.0);
  EXPECT_EQ(env.cursor(), 0u);
}

TEST(Env, SingleStepTimelineEndsImmediately) {
  PianoEnv env(discretize({}, kControlDt));
  env.reset(nominal_params());
  const auto r = env.step(Action{});
  EXPECT_TRUE(r.done);
  EXPECT_THROW(env.step(Action{}), UsageError);
}

TEST(Env, HoldingPoseOnSilentSong) {
  SongTimeline tl = discretize({}, kControlDt);
  tl.steps.resize(10);
  PianoEnv env(tl);
  env.reset(nominal_params());
  for (int i = 0; i < 9; ++i) {
    const auto r = env.step_targets(env.state().q);
    EXPECT_EQ(r.reward.keypress, 2.0);
    EXPECT_NEAR(r.reward.energy, 0.0, 1e-15);
    EXPECT_EQ(r.reward.hand_position, 1.0);
    EXPECT_EQ(r.reward.sliding, 0.0);
    EXPECT_EQ(r.reward.total, 3.0);
  }
}

TEST(Env, EveryStepObservationContractOnFixtures) {
  for (const char* name : kFixtures) {
    const auto song = load_song(kSongs / name);
    PianoEnv env(song);
    Observation obs = env.reset(nominal_params());
    auto policy = random_policy(3);
    std::size_t steps = 0;
    while (!env.done()) {
      ASSERT_EQ(obs.data.size(), 356u);
      ASSERT_TRUE(binary_segments(obs));
      const auto r = env.step(policy(obs));
      ++steps;
      // Counters agree with the number of targeted keys.
      EXPECT_EQ(r.info.tp + r.info.fn, static_cast<std::int64_t>(key_indices(r.targets).size()));
      EXPECT_EQ(r.info, step_counts(r.pressed, r.targets));
      EXPECT_EQ(r.reward.total, r.reward.energy + r.reward.hand_position + r.reward.keypress +
                                    r.reward.sliding);
      EXPECT_LE(r.reward.energy, 0.0);
      EXPECT_LE(r.reward.sliding, 0.0);
      obs = r.observation;
    }
    EXPECT_EQ(steps, song.size()) << name;
  }
}

TEST(Env, RolloutLogsAreDeterministic) {
  const auto song = load_song(kSongs / "twinkle.txt");
  auto run = [&] {
    PianoEnv env(song);
    std::ostringstream log;
    run_episode(env, nominal_params(), random_policy(42), &log, 42);
    return log.str();
  };
  const std::string a = run();
  EXPECT_EQ(a, run());
  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  const auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["t"], 0);
  EXPECT_EQ(j["action"].size(), 13u);
  EXPECT_TRUE(j.contains("reward"));
  EXPECT_TRUE(j.contains("pressed"));
  EXPECT_TRUE(j.contains("targets"));
}

TEST(Env, RewardUsesScriptedPressOnToy) {
  // Finger 2 sits over index 24 at the nominal start; pressing it is the correct case.
  const auto song = load_song(kSongs / "toy.txt");
  PianoEnv env(song);
  env.reset(nominal_params());
  JointVector target = env.state().q;
  target[7] = 1.0;
  target[8] = 1.0;
  StepResult r;
  for (int i = 0; i < 5; ++i) r = env.step_targets(target);
  EXPECT_EQ(key_indices(r.pressed), std::vector<int>{24});
  EXPECT_NEAR(r.reward.keypress, 1.0 + 0.5 * env.state().mu[24], 1e-12);
  EXPECT_EQ(r.info.tp, 1);
  EXPECT_EQ(r.info.fp, 0);
}

TEST(Env, NoFingeringInObservation) {
  // Only joints, slider and key bits: nothing in the vector depends on which finger should play.
  const auto song = load_song(kSongs / "c_major.txt");
  const auto p = nominal_params();
  PlantState s = reference_state(0.3);
  const auto a = build_observation(s, p, song, 3);
  const auto b = assemble_observation(s.q, pressed_keys(s, p), song, 3);
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace pianorl

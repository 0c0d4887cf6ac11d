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

#ifndef PIANORL_ENV_HPP_
#define PIANORL_ENV_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>

#include "pianorl/metrics.hpp"
#include "pianorl/physics.hpp"
#include "pianorl/reward.hpp"
#include "pianorl/song.hpp"

namespace pianorl {

inline constexpr int kActionDim = kNumJoints;

// Layout: joints(12) slider(1) pressed(49) intended(49) future(5 x 49).
struct Observation {
  static constexpr std::size_t kJointsOffset = 0;
  static constexpr std::size_t kSliderOffset = 12;
  static constexpr std::size_t kPressedOffset = 13;
  static constexpr std::size_t kIntendedOffset = 62;
  static constexpr std::size_t kFutureOffset = 111;
  static constexpr std::size_t kSize = 356;

  std::array<double, kSize> data{};

  std::span<const double> joints() const { return {data.data() + kJointsOffset, 12}; }
  double slider() const { return data[kSliderOffset]; }
  std::span<const double> pressed() const { return {data.data() + kPressedOffset, kNumKeys}; }
  std::span<const double> intended() const { return {data.data() + kIntendedOffset, kNumKeys}; }
  std::span<const double> future() const {
    return {data.data() + kFutureOffset, kLookaheadSteps * kNumKeys};
  }
  void set_pressed(const KeyVector& keys);

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Normalized joint targets in [-1, 1], mapped affinely onto the joint limits.
using Action = std::array<double, kActionDim>;

Action clamp_action(const Action& a);
JointVector action_to_targets(const Action& a);
Action targets_to_action(const JointVector& targets);

Observation build_observation(const PlantState& plant, const PhysicalParams& params,
                              const SongTimeline& timeline, std::size_t t);
// Same layout from raw components; used when the pieces come from different
// sources (hybrid execution).
Observation assemble_observation(const JointVector& q, const KeyVector& pressed,
                                 const SongTimeline& timeline, std::size_t t);

struct EnvConfig {
  RewardConfig reward;
};

struct StepResult {
  Observation observation;
  RewardBreakdown reward;
  bool done = false;
  bool fault = false;
  std::string fault_message;
  // Step index the action was scored against.
  std::size_t t = 0;
  KeyVector pressed{};
  KeyVector targets{};
  EpisodeCounts info;
};

class PianoEnv {
 public:
  explicit PianoEnv(SongTimeline timeline, EnvConfig config = {});

  Observation reset(const PhysicalParams& params, std::uint64_t seed = 0);
  // Holds the action for kSubsteps physics steps and scores the result
  // against the cursor's targets. Throws UsageError after the episode ended.
  StepResult step(const Action& action);
  // Same as step() with joint targets already in joint space.
  StepResult step_targets(const JointVector& targets);

  const PlantState& state() const { return state_; }
  const PhysicalParams& params() const { return params_; }
  const SongTimeline& timeline() const { return timeline_; }
  const EnvConfig& config() const { return config_; }
  std::size_t cursor() const { return cursor_; }
  bool done() const { return done_; }
  std::uint64_t seed() const { return seed_; }
  Observation observation() const;

 private:
  SongTimeline timeline_;
  EnvConfig config_;
  PhysicalParams params_;
  PlantState state_;
  std::size_t cursor_ = 0;
  bool done_ = true;
  std::uint64_t seed_ = 0;
};

// Reward from the plant state after a control step. energy and hand_speed
// are aggregated over the substeps by the caller.
RewardBreakdown evaluate_reward(const PlantState& state, const PhysicalParams& params,
                                const KeyVector& targets, double energy, double hand_speed,
                                const RewardConfig& config);

// JSON-lines episode log record.
std::string episode_log_line(const Action& action, const StepResult& result);

using PolicyFn = std::function<Action(const Observation&)>;

struct EpisodeSummary {
  EpisodeScorer scorer;
  double total_reward = 0.0;
  std::size_t steps = 0;
  bool fault = false;
};

// Runs one episode from reset to done, optionally writing the JSON-lines log.
EpisodeSummary run_episode(PianoEnv& env, const PhysicalParams& params, const PolicyFn& policy,
                           std::ostream* log = nullptr, std::uint64_t seed = 0);

}  // namespace pianorl

#endif  // PIANORL_ENV_HPP_

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

#include "pianorl/env.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "pianorl/error.hpp"

namespace pianorl {

void Observation::set_pressed(const KeyVector& keys) {
  for (std::size_t k = 0; k < kNumKeys; ++k) data[kPressedOffset + k] = keys[k] ? 1.0 : 0.0;
}

Action clamp_action(const Action& a) {
  Action out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = std::isnan(a[i]) ? 0.0 : std::clamp(a[i], -1.0, 1.0);
  }
  return out;
}

JointVector action_to_targets(const Action& a) {
  const auto& lim = joint_limits();
  const Action c = clamp_action(a);
  JointVector t;
  for (std::size_t j = 0; j < t.size(); ++j) {
    t[j] = lim.lower[j] + 0.5 * (c[j] + 1.0) * (lim.upper[j] - lim.lower[j]);
  }
  return t;
}

Action targets_to_action(const JointVector& targets) {
  const auto& lim = joint_limits();
  Action a;
  for (std::size_t j = 0; j < a.size(); ++j) {
    a[j] = 2.0 * (targets[j] - lim.lower[j]) / (lim.upper[j] - lim.lower[j]) - 1.0;
  }
  return clamp_action(a);
}

Observation assemble_observation(const JointVector& q, const KeyVector& pressed,
                                 const SongTimeline& timeline, std::size_t t) {
  Observation obs;
  for (std::size_t j = 0; j < kNumHandJoints; ++j) obs.data[Observation::kJointsOffset + j] = q[j];
  obs.data[Observation::kSliderOffset] = q[kSliderJoint];
  obs.set_pressed(pressed);
  const KeyVector& intended = timeline.at(t);
  for (std::size_t k = 0; k < kNumKeys; ++k) {
    obs.data[Observation::kIntendedOffset + k] = intended[k] ? 1.0 : 0.0;
  }
  const auto future = lookahead(timeline, t, kLookaheadSteps);
  for (std::size_t i = 0; i < future.size(); ++i) {
    obs.data[Observation::kFutureOffset + i] = future[i] ? 1.0 : 0.0;
  }
  return obs;
}

Observation build_observation(const PlantState& plant, const PhysicalParams& params,
                              const SongTimeline& timeline, std::size_t t) {
  return assemble_observation(plant.q, pressed_keys(plant, params), timeline, t);
}

RewardBreakdown evaluate_reward(const PlantState& state, const PhysicalParams& params,
                                const KeyVector& targets, double energy, double hand_speed,
                                const RewardConfig& config) {
  const KeyVector pressed = pressed_keys(state, params);
  HandGeometry geom;
  geom.palm_position = palm_position(state.q, params);
  geom.hand_speed = hand_speed;
  for (int k = 0; k < kNumKeys; ++k) {
    if (targets[static_cast<std::size_t>(k)]) {
      geom.target_key_positions.push_back({key_center_x(k), key_surface_raise(k)});
    }
  }
  KeySnapshot snap{state.mu, pressed, targets};
  return combine(energy, r_hand_position(geom, config.tolerance),
                 r_keypress(snap, config.binary_target_state),
                 r_sliding(adjacency_lambda(pressed), hand_speed));
}

PianoEnv::PianoEnv(SongTimeline timeline, EnvConfig config)
    : timeline_(std::move(timeline)), config_(config), params_(nominal_params()) {
  if (timeline_.size() == 0) throw UsageError("timeline must have at least one step");
}

Observation PianoEnv::reset(const PhysicalParams& params, std::uint64_t seed) {
  validate(params);
  params_ = params;
  seed_ = seed;
  state_ = reference_state(params.hand_start_slider);
  cursor_ = 0;
  done_ = false;
  return observation();
}

Observation PianoEnv::observation() const {
  return build_observation(state_, params_, timeline_, std::min(cursor_, timeline_.size() - 1));
}

StepResult PianoEnv::step(const Action& action) { return step_targets(action_to_targets(action)); }

StepResult PianoEnv::step_targets(const JointVector& targets) {
  if (done_) throw UsageError("env step after episode end; call reset()");
  StepResult result;
  result.t = cursor_;
  result.targets = timeline_.at(cursor_);
  double energy = 0.0;
  double speed_sq = 0.0;
  try {
    for (int s = 0; s < kSubsteps; ++s) {
      StepOutput out = pianorl::step(state_, targets, params_);
      state_ = out.state;
      energy += r_energy(out.torques, state_.qdot, config_.reward.c_energy);
      speed_sq += state_.qdot[kSliderJoint] * state_.qdot[kSliderJoint];
    }
  } catch (const NumericalFault& e) {
    result.fault = true;
    result.fault_message = e.what();
  }
  // Energy is the mean over substeps; hand speed is the RMS slider speed.
  energy /= kSubsteps;
  const double hand_speed = std::sqrt(speed_sq / kSubsteps);
  if (!result.fault) {
    result.reward = evaluate_reward(state_, params_, result.targets, energy, hand_speed,
                                    config_.reward);
    result.pressed = pressed_keys(state_, params_);
    result.info = step_counts(result.pressed, result.targets);
  } else {
    result.info = step_counts(result.pressed, result.targets);
  }
  ++cursor_;
  done_ = result.fault || cursor_ >= timeline_.size();
  if (!result.fault) result.observation = observation();
  result.done = done_;
  return result;
}

std::string episode_log_line(const Action& action, const StepResult& r) {
  nlohmann::json j;
  j["t"] = r.t;
  j["action"] = action;
  j["pressed"] = key_indices(r.pressed);
  j["targets"] = key_indices(r.targets);
  j["reward"] = {{"energy", r.reward.energy},
                 {"hand_position", r.reward.hand_position},
                 {"keypress", r.reward.keypress},
                 {"sliding", r.reward.sliding},
                 {"total", r.reward.total}};
  j["counts"] = {{"tp", r.info.tp}, {"fp", r.info.fp}, {"fn", r.info.fn}};
  if (r.fault) j["fault"] = r.fault_message;
  return j.dump();
}

EpisodeSummary run_episode(PianoEnv& env, const PhysicalParams& params, const PolicyFn& policy,
                           std::ostream* log, std::uint64_t seed) {
  EpisodeSummary summary;
  Observation obs = env.reset(params, seed);
  while (!env.done()) {
    const Action action = clamp_action(policy(obs));
    const StepResult r = env.step(action);
    if (log != nullptr) *log << episode_log_line(action, r) << '\n';
    summary.scorer.add(r.pressed, r.targets);
    summary.total_reward += r.reward.total;
    ++summary.steps;
    summary.fault = summary.fault || r.fault;
    obs = r.observation;
  }
  return summary;
}

}  // namespace pianorl

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

#include "pianorl/plant.hpp"

#include <algorithm>

#include "pianorl/error.hpp"

namespace pianorl {

InternalPlant::InternalPlant(PhysicalParams params) : params_(params) {
  validate(params_);
  state_ = reference_state(params_.hand_start_slider);
}

PlantReading InternalPlant::reading(std::uint64_t t) const {
  PlantReading r;
  r.t = t;
  r.pressed = pressed_keys(state_, params_);
  r.joints = state_.q;
  return r;
}

PlantReading InternalPlant::reset(std::uint64_t /*seed*/) {
  state_ = reference_state(params_.hand_start_slider);
  return reading(0);
}

PlantReading InternalPlant::command(std::uint64_t t, const JointVector& targets) {
  try {
    for (int s = 0; s < kSubsteps; ++s) state_ = step(state_, targets, params_).state;
  } catch (const NumericalFault& e) {
    throw PlantError(std::string("plant ") + e.what());
  }
  return reading(t + 1);
}

std::string InternalPlant::describe() const { return "internal:" + params_hash(params_); }

PhysicalParams perturbed_params(const PhysicalParams& nominal, double scale,
                                PerturbationProfile profile) {
  if (scale == 0.0) return nominal;
  PhysicalParams p = nominal;
  const double threshold_shift = profile == PerturbationProfile::kProxy ? 0.08 : 0.1;
  p.key_press_threshold = std::min(0.95, nominal.key_press_threshold + threshold_shift * scale);
  if (profile == PerturbationProfile::kThresholdOnly) return p;
  for (auto& d : p.joint_damping) d *= 1.0 + 0.4 * scale;
  for (auto& k : p.joint_stiffness) k *= std::max(0.1, 1.0 - 0.15 * scale);
  p.key_spring_stiffness *= 1.0 + 0.2 * scale;
  p.finger_key_friction *= 1.0 + 0.3 * scale;
  p.piano_height += 0.003 * scale;
  validate(p);
  return p;
}

}  // namespace pianorl

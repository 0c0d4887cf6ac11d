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

#include "pianorl/reward.hpp"

#include <algorithm>
#include <cmath>

namespace pianorl {

double r_energy(const JointTorques& tau, const JointVector& qdot, double c_energy) {
  double power = 0.0;
  for (std::size_t j = 0; j < qdot.size(); ++j) power += std::abs(tau.tau[j]) * std::abs(qdot[j]);
  return -power * c_energy;
}

double tolerance(double distance, const ToleranceShape& shape) {
  if (distance <= shape.bound) return 1.0;
  // exp(-0.5 (k d / margin)^2) hits value_at_margin at d = margin.
  const double k = std::sqrt(-2.0 * std::log(shape.value_at_margin));
  const double scaled = k * (distance - shape.bound) / shape.margin;
  return std::exp(-0.5 * scaled * scaled);
}

double r_hand_position(const HandGeometry& geom, const ToleranceShape& shape) {
  if (geom.target_key_positions.empty()) return 1.0;
  double sum = 0.0;
  for (const auto& key : geom.target_key_positions) {
    const double dx = key[0] - geom.palm_position[0];
    const double dz = key[1] - geom.palm_position[1];
    sum += tolerance(std::hypot(dx, dz), shape);
  }
  return sum / static_cast<double>(geom.target_key_positions.size());
}

double r_keypress(const KeySnapshot& snap, bool binary_target_state) {
  int k_target = 0;
  int k_correct = 0;
  int k_wrong = 0;
  double target_state_sum = 0.0;
  double max_wrong_mu = 0.0;
  for (std::size_t k = 0; k < snap.mu.size(); ++k) {
    if (snap.targets[k]) {
      ++k_target;
      target_state_sum += binary_target_state ? (snap.pressed[k] ? 1.0 : 0.0) : snap.mu[k];
      if (snap.pressed[k]) ++k_correct;
    } else if (snap.pressed[k]) {
      ++k_wrong;
      max_wrong_mu = std::max(max_wrong_mu, snap.mu[k]);
    }
  }
  if (k_target == 0) return 2.0 * (1.0 - max_wrong_mu);
  const double mean_target = target_state_sum / k_target;
  // Case (2) is derived from case (3) so that their difference is exactly
  // 0.5 in floating point, not just in real arithmetic.
  const double correct_only = 1.0 + 0.5 * mean_target;
  if (k_wrong > 0) return correct_only - 0.5;
  if (k_correct > 0) return correct_only;
  return 0.0;
}

int adjacency_lambda(const KeyVector& pressed) {
  bool any = false;
  for (std::size_t k = 0; k < pressed.size(); ++k) {
    if (!pressed[k]) continue;
    any = true;
    if (k + 1 < pressed.size() && pressed[k + 1]) return 2;
  }
  return any ? 1 : 0;
}

double r_sliding(int lambda, double hand_speed) {
  return -lambda * hand_speed * hand_speed * 3.0;
}

RewardBreakdown combine(double energy, double hand_position, double keypress,
                        double sliding) {
  RewardBreakdown r;
  r.energy = energy;
  r.hand_position = hand_position;
  r.keypress = keypress;
  r.sliding = sliding;
  r.total = energy + hand_position + keypress + sliding;
  return r;
}

}  // namespace pianorl

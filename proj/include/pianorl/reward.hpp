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

#ifndef PIANORL_REWARD_HPP_
#define PIANORL_REWARD_HPP_

#include <array>
#include <span>
#include <vector>

#include "pianorl/physics.hpp"
#include "pianorl/song.hpp"

namespace pianorl {

struct RewardBreakdown {
  double energy = 0.0;
  double hand_position = 0.0;
  double keypress = 0.0;
  double sliding = 0.0;
  double total = 0.0;
};

struct KeySnapshot {
  KeyState mu{};
  KeyVector pressed{};
  KeyVector targets{};
};

struct HandGeometry {
  std::array<double, 2> palm_position{};
  std::vector<std::array<double, 2>> target_key_positions;
  double hand_speed = 0.0;
};

// Gaussian tolerance: 1 inside `bound`, value_at_margin at bound + margin.
struct ToleranceShape {
  double bound = 0.01;
  double margin = 0.10;
  double value_at_margin = 0.1;
};

struct RewardConfig {
  double c_energy = 0.12;
  ToleranceShape tolerance;
  // Average the binary pressed state of targeted keys instead of raw mu.
  bool binary_target_state = false;
};

double r_energy(const JointTorques& tau, const JointVector& qdot, double c_energy);
double tolerance(double distance, const ToleranceShape& shape);
double r_hand_position(const HandGeometry& geom, const ToleranceShape& shape);
double r_keypress(const KeySnapshot& snap, bool binary_target_state = false);
int adjacency_lambda(const KeyVector& pressed);
double r_sliding(int lambda, double hand_speed);

// Sums the four terms; `total` is exactly their sum.
RewardBreakdown combine(double energy, double hand_position, double keypress,
                        double sliding);

}  // namespace pianorl

#endif  // PIANORL_REWARD_HPP_

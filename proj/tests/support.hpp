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

#ifndef PIANORL_TESTS_SUPPORT_HPP_
#define PIANORL_TESTS_SUPPORT_HPP_

#include <cmath>
#include <filesystem>

#include "pianorl/env.hpp"
#include "pianorl/policy.hpp"

namespace pianorl::testing {

inline const std::filesystem::path kSongDir = std::filesystem::path(PIANORL_DATA_DIR) / "songs";

// Closed-loop scripted player: slides finger 2 over the first intended key
// with the finger lifted, then presses once the hand is within 3 mm.
inline PolicyFn scripted_player() {
  return [](const Observation& obs) {
    JointVector t{};
    int goal = -1;
    for (int k = 0; k < kNumKeys && goal < 0; ++k) {
      if (obs.intended()[static_cast<std::size_t>(k)] > 0.5) goal = k;
    }
    const double want = goal >= 0 ? key_center_x(goal) - 2.0 * geometry::kWhiteKeyWidth - 0.003
                                  : obs.slider();
    t[kSliderJoint] = want;
    if (goal >= 0 && std::abs(obs.slider() - want) < 0.003) {
      t[7] = 1.0;
      t[8] = 1.0;
    }
    return targets_to_action(t);
  };
}

// Deterministic policy from a randomly initialised small actor.
inline PolicyFn random_net_player(std::uint64_t seed) {
  NetworkConfig cfg;
  cfg.actor_hidden = {32, 32};
  nn::Rng rng(seed);
  nn::Mlp<float> net(actor_spec(cfg));
  net.initialize(rng, 3.0);
  auto policy = std::make_shared<PolicyNet>(PolicyNet{net.spec(), net.parameters()});
  return [policy](const Observation& obs) {
    nn::Rng unused(0);
    return act(*policy, obs, true, unused);
  };
}

}  // namespace pianorl::testing

#endif  // PIANORL_TESTS_SUPPORT_HPP_

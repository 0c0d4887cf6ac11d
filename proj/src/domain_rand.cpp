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

#include "pianorl/domain_rand.hpp"

#include <algorithm>
#include <cmath>

#include "pianorl/error.hpp"

namespace pianorl {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class ParamDraw {
 public:
  ParamDraw(std::uint64_t seed, std::uint64_t episode) : seed_(seed), episode_(episode) {}

  // Uniform on [lo, hi]; a zero-width interval returns lo untouched.
  double uniform(ParamInterval iv) {
    const double u = counter_uniform(seed_, episode_, counter_++);
    if (iv.hi == iv.lo) return iv.lo;
    return iv.lo + u * (iv.hi - iv.lo);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t episode_;
  std::uint64_t counter_ = 0;
};

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return static_cast<double>(counter_hash(seed, stream, counter) >> 11) * 0x1.0p-53;
}

ParamInterval multiplicative_interval(double nominal, double fraction, double c_dr) {
  if (c_dr == 0.0 || fraction == 0.0) return {nominal, nominal};
  return {nominal * (1.0 - fraction * c_dr), nominal * (1.0 + fraction * c_dr)};
}

ParamInterval additive_interval(double nominal, double range, double c_dr) {
  if (c_dr == 0.0 || range == 0.0) return {nominal, nominal};
  return {nominal - range * c_dr, nominal + range * c_dr};
}

DRSample sample_params(const DRConfig& config, std::uint64_t episode_index) {
  if (!(config.c_dr >= 0.0 && config.c_dr <= 1.0)) {
    throw ConfigError("c_dr must lie in [0, 1]");
  }
  const DRSpreads& s = config.spreads;
  for (double f : {s.joint_damping, s.joint_stiffness, s.key_spring, s.press_threshold,
                   s.friction, s.piano_height, s.hand_start}) {
    if (!(f >= 0.0)) throw ConfigError("DR spreads must be >= 0");
  }
  const PhysicalParams& nom = config.nominal;
  const double c = config.c_dr;
  ParamDraw draw(config.seed, episode_index);
  DRSample out;
  PhysicalParams& p = out.params;

  // The draw order is fixed so a given (seed, episode) stream is stable.
  p.piano_height = draw.uniform(additive_interval(nom.piano_height, s.piano_height, c));
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    p.joint_damping[j] = draw.uniform(multiplicative_interval(nom.joint_damping[j], s.joint_damping, c));
  }
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    p.joint_stiffness[j] =
        draw.uniform(multiplicative_interval(nom.joint_stiffness[j], s.joint_stiffness, c));
  }
  p.key_spring_stiffness =
      draw.uniform(multiplicative_interval(nom.key_spring_stiffness, s.key_spring, c));
  p.key_press_threshold =
      draw.uniform(additive_interval(nom.key_press_threshold, s.press_threshold, c));
  p.finger_key_friction =
      draw.uniform(multiplicative_interval(nom.finger_key_friction, s.friction, c));
  p.hand_start_slider = draw.uniform(additive_interval(nom.hand_start_slider, s.hand_start, c));

  constexpr double kMinPositive = 1e-6;
  auto clamp_min = [&out](double& v, double lo) {
    if (v < lo) {
      v = lo;
      ++out.clamped;
    }
  };
  auto clamp_range = [&out](double& v, double lo, double hi) {
    if (v < lo || v > hi) {
      v = std::clamp(v, lo, hi);
      ++out.clamped;
    }
  };
  clamp_min(p.piano_height, kMinPositive);
  for (auto& v : p.joint_damping) clamp_min(v, kMinPositive);
  for (auto& v : p.joint_stiffness) clamp_min(v, kMinPositive);
  clamp_min(p.key_spring_stiffness, kMinPositive);
  clamp_min(p.finger_key_friction, kMinPositive);
  clamp_range(p.key_press_threshold, 0.01, 0.99);
  const auto& lim = joint_limits();
  clamp_range(p.hand_start_slider, lim.lower[kSliderJoint], lim.upper[kSliderJoint]);
  return out;
}

}  // namespace pianorl

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

#ifndef PIANORL_PHYSICS_HPP_
#define PIANORL_PHYSICS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pianorl/song.hpp"

namespace pianorl {

// Joint layout: finger f owns joints 3f (abduction), 3f+1 (proximal flexion)
// and 3f+2 (distal flexion); joint 12 is the slider along the keyboard.
inline constexpr int kNumFingers = 4;
inline constexpr int kNumHandJoints = 12;
inline constexpr int kNumJoints = 13;
inline constexpr int kSliderJoint = 12;
inline constexpr double kPhysicsDt = 0.005;
inline constexpr int kSubsteps = 10;

using JointVector = std::array<double, kNumJoints>;
using KeyState = std::array<double, kNumKeys>;

// Keyboard and hand geometry. The keyboard follows a real layout: white keys
// tile the x axis, black keys sit on the boundaries between white keys and
// are raised. The hand is planar: x along the keyboard, z up from the white
// key surface.
namespace geometry {
inline constexpr double kWhiteKeyWidth = 0.023;
inline constexpr double kBlackKeyHalfWidth = 0.0045;
inline constexpr double kBlackKeyRaise = 0.010;
inline constexpr double kKeyTravel = 0.011;
inline constexpr double kFingertipHalfWidth = 0.004;
inline constexpr double kAbductionLink = 0.04;
inline constexpr double kProximalLink = 0.045;
inline constexpr double kDistalLink = 0.035;
// Height of the finger bases above the floor; the key surface sits at
// piano_height.
inline constexpr double kHandMountHeight = 0.14;
inline constexpr int kNumWhiteKeys = 29;
}  // namespace geometry

bool is_black_key(int key);
// Center of the key along the keyboard, metres.
double key_center_x(int key);
// Contact interval [lo, hi] of the key along the keyboard. White keys are
// trimmed where black keys sit, so intervals partition the keyboard.
std::pair<double, double> key_contact_interval(int key);
// Resting surface height relative to white keys.
double key_surface_raise(int key);

struct JointLimits {
  JointVector lower;
  JointVector upper;
};
const JointLimits& joint_limits();
JointVector clamp_to_limits(const JointVector& q);

struct PhysicalParams {
  double piano_height = 0.10;
  JointVector joint_damping;
  JointVector joint_stiffness;
  // Key spring force at full depression, N per unit mu.
  double key_spring_stiffness = 1.5;
  double key_press_threshold = 0.5;
  double finger_key_friction = 0.3;
  double hand_start_slider = 12 * geometry::kWhiteKeyWidth;

  friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;
};

PhysicalParams nominal_params();
// Throws ConfigError when a field violates its invariant.
void validate(const PhysicalParams& params);
// FNV-1a over the field bytes, hex encoded.
std::string params_hash(const PhysicalParams& params);

// Versioned constants file (key = value lines, `#` comments).
inline constexpr int kConstantsVersion = 1;
PhysicalParams load_constants(const std::filesystem::path& path);
void save_constants(const PhysicalParams& params, const std::filesystem::path& path);
std::string render_constants(const PhysicalParams& params);
PhysicalParams parse_constants(const std::string& text);

struct PlantState {
  JointVector q{};
  JointVector qdot{};
  KeyState mu{};
  KeyState mu_dot{};
  double sim_time = 0.0;

  friend bool operator==(const PlantState&, const PlantState&) = default;
};

struct JointTorques {
  JointVector tau{};
};

struct FingertipPose {
  double x = 0.0;
  double z = 0.0;
};

using HandPose = std::array<FingertipPose, kNumFingers>;

// Reference pose: every joint at zero, slider at the given position.
PlantState reference_state(double slider);

HandPose forward_kinematics(const JointVector& q, const PhysicalParams& params);

// Palm position (x, z): centred over the four finger bases.
std::array<double, 2> palm_position(const JointVector& q, const PhysicalParams& params);

struct StepOutput {
  PlantState state;
  JointTorques torques;
};

// One semi-implicit Euler step of kPhysicsDt. Targets are clamped to the
// joint limits. Throws NumericalFault on a non-finite result.
StepOutput step(const PlantState& state, const JointVector& targets,
                const PhysicalParams& params);

KeyVector pressed_keys(const PlantState& state, const PhysicalParams& params);

// Trajectory dump: one CSV row per state, columns t, q0..q12, qdot0..qdot12,
// mu0..mu48.
void write_trajectory_csv(std::ostream& out, const std::vector<PlantState>& states);

}  // namespace pianorl

#endif  // PIANORL_PHYSICS_HPP_

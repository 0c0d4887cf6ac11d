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

#include "pianorl/physics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pianorl/error.hpp"

namespace pianorl {
namespace {

using namespace geometry;

constexpr double kContactStiffness = 300.0;  // N/m
constexpr double kKeyInertia = 0.0006;
constexpr double kKeyDamping = 0.04;

// Abduction, proximal, distal per finger; slider mass last.
constexpr JointVector kJointInertia = {0.002, 0.003, 0.002, 0.002, 0.003, 0.002,
                                       0.002, 0.003, 0.002, 0.002, 0.003, 0.002,
                                       0.003};

constexpr std::array<int, 12> kWhiteOrdinal = {0, -1, 1, -1, 2, 3, -1, 4, -1, 5, -1, 6};

int white_index(int key) {
  return 7 * (key / 12) + kWhiteOrdinal[static_cast<std::size_t>(key % 12)];
}

double hand_base_height(const PhysicalParams& p) { return kHandMountHeight - p.piano_height; }

template <typename Fn>
void for_each_contact(double tip_x, Fn&& fn) {
  const double lo = tip_x - kFingertipHalfWidth;
  const double hi = tip_x + kFingertipHalfWidth;
  // Keys are sorted along x; scan the neighbourhood of the nearest white key.
  const int w = static_cast<int>(std::lround(tip_x / kWhiteKeyWidth));
  const int approx_key = 12 * (w / 7);
  for (int k = std::max(0, approx_key - 14); k < std::min(kNumKeys, approx_key + 26); ++k) {
    const auto [klo, khi] = key_contact_interval(k);
    if (klo < hi && khi > lo) fn(k);
  }
}

}  // namespace

bool is_black_key(int key) { return kWhiteOrdinal[static_cast<std::size_t>(key % 12)] < 0; }

double key_center_x(int key) {
  if (is_black_key(key)) return (white_index(key - 1) + 0.5) * kWhiteKeyWidth;
  return white_index(key) * kWhiteKeyWidth;
}

std::pair<double, double> key_contact_interval(int key) {
  const double x = key_center_x(key);
  if (is_black_key(key)) return {x - kBlackKeyHalfWidth, x + kBlackKeyHalfWidth};
  double lo = x - 0.5 * kWhiteKeyWidth;
  double hi = x + 0.5 * kWhiteKeyWidth;
  if (key > 0 && is_black_key(key - 1)) lo = key_center_x(key - 1) + kBlackKeyHalfWidth;
  if (key + 1 < kNumKeys && is_black_key(key + 1)) hi = key_center_x(key + 1) - kBlackKeyHalfWidth;
  return {lo, hi};
}

double key_surface_raise(int key) { return is_black_key(key) ? kBlackKeyRaise : 0.0; }

const JointLimits& joint_limits() {
  static const JointLimits limits = [] {
    JointLimits l;
    for (int f = 0; f < kNumFingers; ++f) {
      const auto b = static_cast<std::size_t>(3 * f);
      l.lower[b] = -0.5;
      l.upper[b] = 0.5;
      l.lower[b + 1] = -0.8;
      l.upper[b + 1] = 1.0;
      l.lower[b + 2] = 0.0;
      l.upper[b + 2] = 1.0;
    }
    l.lower[kSliderJoint] = 0.0;
    l.upper[kSliderJoint] = (kNumWhiteKeys - kNumFingers) * kWhiteKeyWidth;
    return l;
  }();
  return limits;
}

JointVector clamp_to_limits(const JointVector& q) {
  const auto& lim = joint_limits();
  JointVector out;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::clamp(q[j], lim.lower[j], lim.upper[j]);
  return out;
}

PhysicalParams nominal_params() {
  PhysicalParams p;
  p.joint_damping.fill(0.1);
  p.joint_stiffness.fill(3.0);
  return p;
}

void validate(const PhysicalParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string(name) + " must be finite and > 0");
    }
  };
  positive(p.piano_height, "piano_height");
  for (double v : p.joint_damping) positive(v, "joint_damping");
  for (double v : p.joint_stiffness) positive(v, "joint_stiffness");
  positive(p.key_spring_stiffness, "key_spring_stiffness");
  positive(p.finger_key_friction, "finger_key_friction");
  if (!(p.key_press_threshold > 0.0 && p.key_press_threshold < 1.0)) {
    throw ConfigError("key_press_threshold must lie in (0, 1)");
  }
  const auto& lim = joint_limits();
  if (!(p.hand_start_slider >= lim.lower[kSliderJoint] &&
        p.hand_start_slider <= lim.upper[kSliderJoint])) {
    throw ConfigError("hand_start_slider outside the slider range");
  }
  if (!(hand_base_height(p) > 0.0)) throw ConfigError("piano_height above the hand mount");
}

std::string params_hash(const PhysicalParams& p) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  };
  mix(p.piano_height);
  for (double v : p.joint_damping) mix(v);
  for (double v : p.joint_stiffness) mix(v);
  mix(p.key_spring_stiffness);
  mix(p.key_press_threshold);
  mix(p.finger_key_friction);
  mix(p.hand_start_slider);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string render_constants(const PhysicalParams& p) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto list = [&os](const JointVector& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  };
  os << "# Nominal physical parameters for the keyboard/hand plant.\n";
  os << "version = " << kConstantsVersion << "\n";
  os << "piano_height = " << p.piano_height << "\n";
  os << "joint_damping = ";
  list(p.joint_damping);
  os << "\njoint_stiffness = ";
  list(p.joint_stiffness);
  os << "\nkey_spring_stiffness = " << p.key_spring_stiffness << "\n";
  os << "key_press_threshold = " << p.key_press_threshold << "\n";
  os << "finger_key_friction = " << p.finger_key_friction << "\n";
  os << "hand_start_slider = " << p.hand_start_slider << "\n";
  return os.str();
}

PhysicalParams parse_constants(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("constants file: ") + e.what());
  }
  auto number = [&tree](const std::string& key) {
    const auto v = tree.get_optional<std::string>(key);
    if (!v) throw ConfigError("constants file: missing " + key);
    try {
      std::size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument(key);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("constants file: bad number for " + key);
    }
  };
  auto joints = [&tree](const std::string& key) {
    const auto v = tree.get_optional<std::string>(key);
    if (!v) throw ConfigError("constants file: missing " + key);
    std::istringstream is(*v);
    JointVector out;
    for (auto& x : out) {
      if (!(is >> x)) throw ConfigError("constants file: " + key + " needs 13 numbers");
    }
    std::string rest;
    if (is >> rest) throw ConfigError("constants file: " + key + " needs 13 numbers");
    return out;
  };
  const int version = static_cast<int>(number("version"));
  if (version != kConstantsVersion) {
    throw VersionError("constants file version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kConstantsVersion) + ")");
  }
  PhysicalParams p;
  p.piano_height = number("piano_height");
  p.joint_damping = joints("joint_damping");
  p.joint_stiffness = joints("joint_stiffness");
  p.key_spring_stiffness = number("key_spring_stiffness");
  p.key_press_threshold = number("key_press_threshold");
  p.finger_key_friction = number("finger_key_friction");
  p.hand_start_slider = number("hand_start_slider");
  validate(p);
  return p;
}

PhysicalParams load_constants(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open constants file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_constants(ss.str());
}

void save_constants(const PhysicalParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write constants file: " + path.string());
  out << render_constants(params);
}

PlantState reference_state(double slider) {
  PlantState s;
  s.q[kSliderJoint] = slider;
  return s;
}

HandPose forward_kinematics(const JointVector& q, const PhysicalParams& params) {
  HandPose pose;
  const double base_z = hand_base_height(params);
  for (int f = 0; f < kNumFingers; ++f) {
    const auto b = static_cast<std::size_t>(3 * f);
    pose[static_cast<std::size_t>(f)].x =
        q[kSliderJoint] + f * kWhiteKeyWidth + kAbductionLink * std::sin(q[b]);
    pose[static_cast<std::size_t>(f)].z =
        base_z - kProximalLink * std::sin(q[b + 1]) - kDistalLink * std::sin(q[b + 1] + q[b + 2]);
  }
  return pose;
}

std::array<double, 2> palm_position(const JointVector& q, const PhysicalParams& params) {
  return {q[kSliderJoint] + 0.5 * (kNumFingers - 1) * kWhiteKeyWidth, hand_base_height(params)};
}

StepOutput step(const PlantState& state, const JointVector& targets,
                const PhysicalParams& params) {
  const JointVector target = clamp_to_limits(targets);
  const auto& lim = joint_limits();
  const double dt = kPhysicsDt;
  StepOutput out;
  PlantState& next = out.state;
  next = state;

  JointVector generalized{};
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const double tau = params.joint_stiffness[j] * (target[j] - state.q[j]) -
                       params.joint_damping[j] * state.qdot[j];
    out.torques.tau[j] = tau;
    generalized[j] = tau;
  }

  // Penalty contact between fingertips and key surfaces.
  const HandPose pose = forward_kinematics(state.q, params);
  KeyState key_force{};
  std::array<double, kNumFingers> normal{};
  for (int f = 0; f < kNumFingers; ++f) {
    const auto& tip = pose[static_cast<std::size_t>(f)];
    for_each_contact(tip.x, [&](int k) {
      const auto kk = static_cast<std::size_t>(k);
      const double surface = key_surface_raise(k) - state.mu[kk] * kKeyTravel;
      const double penetration = surface - tip.z;
      if (penetration > 0.0) {
        const double force = kContactStiffness * penetration;
        key_force[kk] += force;
        normal[static_cast<std::size_t>(f)] += force;
      }
    });
    const auto b = static_cast<std::size_t>(3 * f);
    const double c12 = std::cos(state.q[b + 1] + state.q[b + 2]);
    const double dz_dq1 = -kProximalLink * std::cos(state.q[b + 1]) - kDistalLink * c12;
    const double dz_dq2 = -kDistalLink * c12;
    generalized[b + 1] += dz_dq1 * normal[static_cast<std::size_t>(f)];
    generalized[b + 2] += dz_dq2 * normal[static_cast<std::size_t>(f)];
  }

  for (std::size_t j = 0; j < kNumJoints; ++j) {
    next.qdot[j] = state.qdot[j] + dt * generalized[j] / kJointInertia[j];
  }
  for (std::size_t k = 0; k < kNumKeys; ++k) {
    const double acc = (key_force[k] - params.key_spring_stiffness * state.mu[k] -
                        kKeyDamping * state.mu_dot[k]) / kKeyInertia;
    next.mu_dot[k] = state.mu_dot[k] + dt * acc;
  }

  // Coulomb friction at pressing fingertips: the impulse that would stop the
  // fingertip's lateral motion is applied if it fits inside the friction
  // cone (stick), otherwise the cone limit is applied and the tip slides.
  const double m_slider = kJointInertia[kSliderJoint];
  for (int f = 0; f < kNumFingers; ++f) {
    const double n = normal[static_cast<std::size_t>(f)];
    if (n <= 0.0) continue;
    const auto b = static_cast<std::size_t>(3 * f);
    const double lever = kAbductionLink * std::cos(state.q[b]);
    const double v = next.qdot[kSliderJoint] + lever * next.qdot[b];
    const double inv_mass = 1.0 / m_slider + lever * lever / kJointInertia[b];
    const double limit = params.finger_key_friction * n * dt;
    const double impulse = std::clamp(-v / inv_mass, -limit, limit);
    next.qdot[kSliderJoint] += impulse / m_slider;
    next.qdot[b] += impulse * lever / kJointInertia[b];
  }

  for (std::size_t j = 0; j < kNumJoints; ++j) {
    next.q[j] = state.q[j] + dt * next.qdot[j];
    if (next.q[j] < lim.lower[j]) {
      next.q[j] = lim.lower[j];
      next.qdot[j] = std::max(0.0, next.qdot[j]);
    } else if (next.q[j] > lim.upper[j]) {
      next.q[j] = lim.upper[j];
      next.qdot[j] = std::min(0.0, next.qdot[j]);
    }
  }
  for (std::size_t k = 0; k < kNumKeys; ++k) {
    next.mu[k] = state.mu[k] + dt * next.mu_dot[k];
    if (next.mu[k] < 0.0) {
      next.mu[k] = 0.0;
      next.mu_dot[k] = std::max(0.0, next.mu_dot[k]);
    } else if (next.mu[k] > 1.0) {
      next.mu[k] = 1.0;
      next.mu_dot[k] = std::min(0.0, next.mu_dot[k]);
    }
  }
  next.sim_time = state.sim_time + dt;

  auto finite = [](const auto& arr) {
    return std::all_of(arr.begin(), arr.end(), [](double v) { return std::isfinite(v); });
  };
  if (!finite(next.q) || !finite(next.qdot) || !finite(next.mu) || !finite(next.mu_dot)) {
    throw NumericalFault("integration fault: non-finite plant state at t=" +
                         std::to_string(next.sim_time));
  }
  return out;
}

KeyVector pressed_keys(const PlantState& state, const PhysicalParams& params) {
  KeyVector out{};
  for (std::size_t k = 0; k < kNumKeys; ++k) out[k] = state.mu[k] >= params.key_press_threshold;
  return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<PlantState>& states) {
  out << "t";
  for (int j = 0; j < kNumJoints; ++j) out << ",q" << j;
  for (int j = 0; j < kNumJoints; ++j) out << ",qdot" << j;
  for (int k = 0; k < kNumKeys; ++k) out << ",mu" << k;
  out << "\n" << std::setprecision(17);
  for (const auto& s : states) {
    out << s.sim_time;
    for (double v : s.q) out << ',' << v;
    for (double v : s.qdot) out << ',' << v;
    for (double v : s.mu) out << ',' << v;
    out << '\n';
  }
}

}  // namespace pianorl

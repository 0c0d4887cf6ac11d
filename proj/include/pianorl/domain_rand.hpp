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

#ifndef PIANORL_DOMAIN_RAND_HPP_
#define PIANORL_DOMAIN_RAND_HPP_

#include <cstdint>

#include "pianorl/physics.hpp"

namespace pianorl {

// Half-widths of the sampling intervals at c_dr = 1. Multiplicative spreads
// are fractions of the nominal value; additive spreads are absolute.
struct DRSpreads {
  double joint_damping = 0.5;     // fraction
  double joint_stiffness = 0.3;   // fraction
  double key_spring = 0.3;        // fraction
  double press_threshold = 0.15;  // absolute
  double friction = 0.5;          // fraction
  double piano_height = 0.01;     // absolute, m
  double hand_start = 0.05;       // absolute, m
};

struct DRConfig {
  double c_dr = 0.0;
  PhysicalParams nominal = nominal_params();
  DRSpreads spreads;
  std::uint64_t seed = 0;
};

struct DRSample {
  PhysicalParams params;
  // Number of fields clamped back into their valid range.
  int clamped = 0;
};

// Uniform draw per parameter from nominal +- spread * c_dr. Deterministic in
// (seed, episode_index); c_dr = 0 returns the nominal parameters exactly.
DRSample sample_params(const DRConfig& config, std::uint64_t episode_index);

// Sampling interval of one parameter, for range checks.
struct ParamInterval {
  double lo;
  double hi;
};
ParamInterval multiplicative_interval(double nominal, double fraction, double c_dr);
ParamInterval additive_interval(double nominal, double range, double c_dr);

// Counter-based generator: a stream is keyed by (seed, stream, counter).
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);
// Uniform in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

}  // namespace pianorl

#endif  // PIANORL_DOMAIN_RAND_HPP_

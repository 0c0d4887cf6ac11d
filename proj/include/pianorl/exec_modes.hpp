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

#ifndef PIANORL_EXEC_MODES_HPP_
#define PIANORL_EXEC_MODES_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pianorl/env.hpp"
#include "pianorl/metrics.hpp"
#include "pianorl/plant.hpp"

namespace pianorl {

enum class ExecMode { kJointMirroring, kHybrid, kRealWorld };

std::string mode_name(ExecMode m);
// Accepts mirror/mirroring, hybrid, real/real-world. Throws UsageError.
ExecMode parse_mode(const std::string& s);

enum class Source : std::uint8_t { kSim, kPlant };

// Per observation segment: joints, slider, pressed, intended, future.
inline constexpr std::size_t kNumSegments = 5;
using Provenance = std::array<Source, kNumSegments>;
inline constexpr std::size_t kPressedSegment = 2;

Provenance expected_provenance(ExecMode m);

struct FusedObservation {
  Observation obs;
  Provenance provenance{};
};

struct ModeConfig {
  ExecMode mode = ExecMode::kHybrid;
  PhysicalParams shadow_params = nominal_params();
  EnvConfig env;
  // Send the shadow's joint positions instead of its joint targets.
  bool forward_positions = false;
};

struct ModeEpisode {
  // Sim-side scores are NaN in real-world mode, where the shadow is idle.
  Scores sim;
  Scores plant;
  EpisodeScorer sim_scorer;
  EpisodeScorer plant_scorer;
  std::vector<KeyVector> plant_keys;
  // Steps where shadow and plant pressed keys differ (shadow active only).
  std::size_t divergence = 0;
  std::size_t stale_steps = 0;
  bool aborted = false;
  std::string abort_message;
};

using ObservationHook = std::function<void(std::size_t t, const FusedObservation&)>;

// Plant errors abort the episode: the partial result and log are kept and
// flagged. A numerical fault in the shadow ends the episode the same way.
ModeEpisode run_mode_episode(const PolicyFn& policy, const SongTimeline& timeline,
                             const ModeConfig& cfg, Plant& plant, std::ostream* log = nullptr,
                             std::uint64_t seed = 0, const ObservationHook& hook = {});

// Shadow/plant divergence under joint mirroring for each perturbation scale.
std::vector<std::size_t> divergence_sweep(const PolicyFn& policy, const SongTimeline& timeline,
                                          const PhysicalParams& nominal,
                                          const std::vector<double>& scales,
                                          PerturbationProfile profile, const EnvConfig& env = {});

// Re-scores an episode log (either env or mode logs). `side` picks the
// pressed keys: "sim" or "plant"; env logs only have one side.
EpisodeScorer score_log(std::istream& log, const std::string& side);

}  // namespace pianorl

#endif  // PIANORL_EXEC_MODES_HPP_

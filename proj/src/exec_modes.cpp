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

#include "pianorl/exec_modes.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "pianorl/error.hpp"

namespace pianorl {
namespace {

using nlohmann::json;

Scores nan_scores() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {nan, nan, nan};
}

const char* source_name(Source s) { return s == Source::kSim ? "sim" : "plant"; }

}  // namespace

std::string mode_name(ExecMode m) {
  switch (m) {
    case ExecMode::kJointMirroring: return "mirroring";
    case ExecMode::kHybrid: return "hybrid";
    case ExecMode::kRealWorld: return "real-world";
  }
  return "?";
}

ExecMode parse_mode(const std::string& s) {
  if (s == "mirror" || s == "mirroring" || s == "joint-mirroring") return ExecMode::kJointMirroring;
  if (s == "hybrid") return ExecMode::kHybrid;
  if (s == "real" || s == "real-world" || s == "realworld") return ExecMode::kRealWorld;
  throw UsageError("unknown mode '" + s + "' (expected mirror, hybrid or real)");
}

Provenance expected_provenance(ExecMode m) {
  Provenance p;
  p.fill(m == ExecMode::kRealWorld ? Source::kPlant : Source::kSim);
  if (m == ExecMode::kHybrid) p[kPressedSegment] = Source::kPlant;
  return p;
}

ModeEpisode run_mode_episode(const PolicyFn& policy, const SongTimeline& timeline,
                             const ModeConfig& cfg, Plant& plant, std::ostream* log,
                             std::uint64_t seed, const ObservationHook& hook) {
  ModeEpisode out;
  const bool shadow_active = cfg.mode != ExecMode::kRealWorld;
  PianoEnv shadow(timeline, cfg.env);
  Observation shadow_obs = shadow.reset(cfg.shadow_params, seed);

  auto abort = [&](const std::string& why) {
    out.aborted = true;
    out.abort_message = why;
    if (log != nullptr) *log << json{{"aborted", why}}.dump() << '\n';
  };

  PlantReading plant_state;
  try {
    plant_state = plant.reset(seed);
  } catch (const PlantError& e) {
    abort(e.what());
  }

  for (std::size_t t = 0; !out.aborted && t < timeline.size(); ++t) {
    FusedObservation fused;
    fused.provenance = expected_provenance(cfg.mode);
    switch (cfg.mode) {
      case ExecMode::kJointMirroring:
        fused.obs = shadow_obs;
        break;
      case ExecMode::kHybrid:
        fused.obs = shadow_obs;
        fused.obs.set_pressed(plant_state.pressed);
        break;
      case ExecMode::kRealWorld:
        if (!plant_state.joints) {
          abort("real-world mode needs joint telemetry from the plant");
          continue;
        }
        fused.obs = assemble_observation(*plant_state.joints, plant_state.pressed, timeline, t);
        break;
    }
    if (hook) hook(t, fused);

    const Action action = clamp_action(policy(fused.obs));
    const JointVector targets = action_to_targets(action);
    StepResult sim;
    if (shadow_active) {
      sim = shadow.step_targets(targets);
      if (sim.fault) {
        abort("shadow " + sim.fault_message);
        continue;
      }
    }
    const JointVector command =
        cfg.forward_positions && shadow_active ? shadow.state().q : targets;
    try {
      plant_state = plant.command(t, command);
    } catch (const PlantError& e) {
      abort(e.what());
      continue;
    }

    const KeyVector& goal = timeline.at(t);
    out.plant_scorer.add(plant_state.pressed, goal);
    out.plant_keys.push_back(plant_state.pressed);
    if (plant_state.stale) ++out.stale_steps;
    if (shadow_active) {
      out.sim_scorer.add(sim.pressed, goal);
      if (sim.pressed != plant_state.pressed) ++out.divergence;
      shadow_obs = sim.observation;
    }

    if (log != nullptr) {
      json j;
      j["t"] = t;
      j["mode"] = mode_name(cfg.mode);
      j["action"] = action;
      j["targets"] = key_indices(goal);
      if (shadow_active) j["sim_pressed"] = key_indices(sim.pressed);
      j["plant_pressed"] = key_indices(plant_state.pressed);
      json prov = json::array();
      for (Source s : fused.provenance) prov.push_back(source_name(s));
      j["provenance"] = prov;
      if (plant_state.stale) j["stale"] = true;
      *log << j.dump() << '\n';
    }
  }

  out.plant = out.plant_scorer.scores();
  out.sim = shadow_active ? out.sim_scorer.scores() : nan_scores();
  return out;
}

std::vector<std::size_t> divergence_sweep(const PolicyFn& policy, const SongTimeline& timeline,
                                          const PhysicalParams& nominal,
                                          const std::vector<double>& scales,
                                          PerturbationProfile profile, const EnvConfig& env) {
  std::vector<std::size_t> counts;
  ModeConfig cfg;
  cfg.mode = ExecMode::kJointMirroring;
  cfg.shadow_params = nominal;
  cfg.env = env;
  for (double s : scales) {
    InternalPlant plant(perturbed_params(nominal, s, profile));
    counts.push_back(run_mode_episode(policy, timeline, cfg, plant).divergence);
  }
  return counts;
}

EpisodeScorer score_log(std::istream& log, const std::string& side) {
  if (side != "sim" && side != "plant") throw UsageError("side must be sim or plant");
  EpisodeScorer scorer;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(log, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw ParseError("episode log line " + std::to_string(lineno) + " is not JSON", lineno);
    }
    if (j.contains("aborted")) continue;
    const char* field = j.contains("plant_pressed") ? (side == "sim" ? "sim_pressed" : "plant_pressed")
                                                    : "pressed";
    if (!j.contains(field) || !j.contains("targets")) {
      throw ParseError("episode log line " + std::to_string(lineno) + " lacks " + field +
                           " or targets", lineno);
    }
    try {
      scorer.add(keys_from_indices(j[field].get<std::vector<int>>()),
                 keys_from_indices(j["targets"].get<std::vector<int>>()));
    } catch (const json::exception&) {
      throw ParseError("episode log line " + std::to_string(lineno) + " has bad key lists", lineno);
    }
  }
  return scorer;
}

}  // namespace pianorl

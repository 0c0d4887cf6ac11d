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

#ifndef PIANORL_TRAINER_HPP_
#define PIANORL_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pianorl/domain_rand.hpp"
#include "pianorl/env.hpp"
#include "pianorl/policy.hpp"

namespace pianorl {

enum class BudgetUnit { kSteps, kEpisodes };

struct TrainerConfig {
  NetworkConfig network;
  EnvConfig env;
  std::uint64_t budget = 1'000'000;
  // How "budget" is counted. Steps is the default reading.
  BudgetUnit budget_unit = BudgetUnit::kSteps;
  std::uint64_t warmup = 5'000;
  int utd_ratio = 20;
  int batch_size = 256;
  std::size_t replay_capacity = 1'000'000;
  double discount = 0.99;
  double target_smoothing = 0.005;
  double learning_rate = 3e-4;
  double init_temperature = 0.1;
  // Defaults to -|A| when unset.
  std::optional<double> target_entropy;
  // Hold the entropy temperature at init_temperature.
  bool fixed_temperature = false;
  std::uint64_t eval_interval = 5'000;
  int eval_episodes = 1;
  // Stop once a deterministic evaluation reaches this F1.
  std::optional<double> stop_at_eval_f1;
  std::uint64_t seed = 0;
};

std::uint64_t config_hash(const TrainerConfig& cfg, const DRConfig& dr);

struct CurveRow {
  std::uint64_t step = 0;
  Scores eval;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double temperature = 0.0;
};

void write_learning_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve);

struct TrainResult {
  Checkpoint best;
  Checkpoint final;
  double best_eval_f1 = -1.0;
  std::vector<CurveRow> curve;
  std::uint64_t env_steps = 0;
  std::uint64_t episodes = 0;
  std::uint64_t dr_clamps = 0;
  bool diverged = false;
  std::string message;
};

using TrainProgressFn = std::function<void(const CurveRow&)>;

// Soft actor-critic with DroQ-style critics (dropout + layer norm, high
// update-to-data ratio) and automatic temperature tuning. Physical parameters
// are resampled from `dr` at every episode. On a non-finite loss training
// stops, `diverged` is set and `final` holds the last good checkpoint.
// Throws UsageError if the budget is smaller than the warmup.
TrainResult train(const SongTimeline& song, const DRConfig& dr, const TrainerConfig& cfg,
                  const TrainProgressFn& progress = {});

// Deterministic evaluation of a policy on fixed parameters.
EpisodeSummary evaluate_policy(const PolicyNet& policy, const SongTimeline& song,
                               const PhysicalParams& params, const EnvConfig& env = {},
                               std::ostream* log = nullptr);

// Cross-entropy method over open-loop action sequences. Independent of the
// learner: a sanity check that the environment admits a good solution.
struct CemConfig {
  int iterations = 30;
  int population = 64;
  int elites = 8;
  double init_std = 0.6;
  double min_std = 0.05;
  // Each decision variable is held for this many control steps.
  int hold_steps = 10;
  std::uint64_t seed = 0;
};

struct CemResult {
  std::vector<Action> actions;
  Scores scores;
  double total_reward = 0.0;
};

CemResult cem_optimize(const SongTimeline& song, const PhysicalParams& params,
                       const CemConfig& cfg, const EnvConfig& env = {});

}  // namespace pianorl

#endif  // PIANORL_TRAINER_HPP_

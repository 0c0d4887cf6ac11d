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

#ifndef PIANORL_EXPERIMENTS_HPP_
#define PIANORL_EXPERIMENTS_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pianorl/domain_rand.hpp"
#include "pianorl/exec_modes.hpp"
#include "pianorl/metrics.hpp"
#include "pianorl/trainer.hpp"

namespace pianorl {

// git describe of the build.
std::string build_git_describe();

std::string dr_hash(const DRConfig& dr);
std::string hex64(std::uint64_t v);

struct ExperimentConfig {
  std::vector<std::filesystem::path> songs;
  int seeds = 2;
  int runs = 3;
  // Song suite: one mode, checkpoints trained at suite_c_dr.
  ExecMode mode = ExecMode::kHybrid;
  double suite_c_dr = 0.0;
  // Mode ablation; real-world rows use checkpoints trained at ablation_c_dr.
  std::vector<ExecMode> modes = {ExecMode::kJointMirroring, ExecMode::kHybrid,
                                 ExecMode::kRealWorld};
  double ablation_c_dr = 0.5;
  // DR sweep: one training per cell and seed, evaluated on one song.
  std::vector<double> c_dr_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::filesystem::path dr_song;
  int dr_seeds = 1;
  ExecMode dr_mode = ExecMode::kRealWorld;
  // Plant proxy: fixed perturbation plus a small per-run variation.
  double plant_scale = 1.0;
  PerturbationProfile plant_profile = PerturbationProfile::kProxy;
  double plant_jitter = 0.05;
  Aggregation aggregation = Aggregation::kMicro;
  std::filesystem::path checkpoint_dir = "checkpoints";
  std::filesystem::path out_dir = "results";
};

// Everything a grid cell needs besides the experiment layout.
struct ExperimentContext {
  ExperimentConfig experiment;
  TrainerConfig trainer;
  DRConfig dr;
  ModeConfig modes;
  std::uint64_t seed = 0;
  int workers = 1;
};

// Plant runs per DR cell: 3 everywhere, 5 on [0.2, 0.8], 7 on [0.3, 0.7].
int runs_for_c_dr(double c_dr);

std::filesystem::path checkpoint_path(const std::filesystem::path& dir,
                                      const std::filesystem::path& song, double c_dr,
                                      std::uint64_t seed);

// Plant parameters for one evaluation run.
PhysicalParams plant_params_for_run(const ExperimentContext& ctx, std::uint64_t seed, int run);

struct ResultRow {
  std::string experiment;
  std::string song;
  std::string mode;
  double c_dr = 0.0;
  std::uint64_t seed = 0;
  int run = 0;
  std::string side;  // sim | plant
  Scores scores;
  Aggregation aggregation = Aggregation::kMicro;
  std::size_t divergence = 0;
  std::string status = "ok";  // ok | missing | aborted | diverged
  std::string config_hash;
  std::string dr_hash;
  std::string git_describe;
};

struct SummaryRow {
  std::string experiment;
  std::string song;
  std::string mode;
  double c_dr = 0.0;
  std::string side;
  std::size_t n = 0;
  Scores mean;
  // Sample standard deviation; 0 when n < 2.
  Scores stddev;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<std::string> missing;
};

// Rows with status ok and a finite F1, grouped by experiment, song, mode,
// c_dr and side in order of first appearance.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

using ExperimentLog = std::function<void(const std::string&)>;

ExperimentResult run_song_suite(const ExperimentContext& ctx, const ExperimentLog& log = {});
ExperimentResult run_mode_ablation(const ExperimentContext& ctx, const ExperimentLog& log = {});
// Trains every cell; divergent trainings become failed rows.
ExperimentResult run_dr_sweep(const ExperimentContext& ctx, const ExperimentLog& log = {});

// Writes <name>.csv, <name>_summary.csv and <name>.svg into out_dir.
void write_experiment_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir,
                              const std::string& name);

// Runs tasks [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task);

}  // namespace pianorl

#endif  // PIANORL_EXPERIMENTS_HPP_

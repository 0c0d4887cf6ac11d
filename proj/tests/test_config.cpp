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


#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "pianorl/config.hpp"
#include "pianorl/error.hpp"

namespace pianorl {
namespace {

namespace fs = std::filesystem;
const fs::path kData = PIANORL_DATA_DIR;

TEST(RunConfig, DefaultsWithoutFile) {
  const RunConfig cfg = load_run_config(std::nullopt);
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_EQ(cfg.plant, "internal");
  EXPECT_EQ(cfg.trainer.budget, TrainerConfig{}.budget);
  EXPECT_EQ(params_hash(cfg.dr.nominal), params_hash(nominal_params()));
  EXPECT_EQ(cfg.experiment.c_dr_grid.size(), 11u);
}

TEST(RunConfig, ParsesSectionsAndLists) {
  const RunConfig cfg = parse_run_config(
      "[run]\nseed = 7\n"
      "[trainer]\nbudget = 5000\nactor_hidden = 32 16\ntarget_entropy = -4\nbudget_unit = episodes\n"
      "[physics]\njoint_damping = 0.2\n"
      "[modes]\nmode = real\nplant = tcp:localhost:9000\n"
      "[experiment]\nc_dr_grid = 0 0.5 1\naggregation = per_step\n");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.trainer.budget, 5000u);
  EXPECT_EQ(cfg.trainer.budget_unit, BudgetUnit::kEpisodes);
  EXPECT_EQ(cfg.trainer.network.actor_hidden, (std::vector<int>{32, 16}));
  EXPECT_EQ(cfg.trainer.target_entropy.value(), -4.0);
  for (double d : cfg.dr.nominal.joint_damping) EXPECT_EQ(d, 0.2);
  EXPECT_EQ(cfg.modes.mode, ExecMode::kRealWorld);
  EXPECT_EQ(cfg.plant, "tcp:localhost:9000");
  EXPECT_EQ(cfg.experiment.c_dr_grid, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(cfg.experiment.aggregation, Aggregation::kPerStep);
  // The shadow simulator follows the nominal physics.
  EXPECT_EQ(params_hash(cfg.modes.shadow_params), params_hash(cfg.dr.nominal));
}

TEST(RunConfig, OverridesBeatFile) {
  const RunConfig cfg = parse_run_config("[run]\nseed = 7\n", {}, {{"run.seed", "9"}, {"dr.c_dr", "0.4"}});
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_DOUBLE_EQ(cfg.dr.c_dr, 0.4);
}

TEST(RunConfig, RejectsBadInput) {
  EXPECT_THROW(parse_run_config("[run]\nsede = 1\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[trainer]\nbudget = many\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[trainer]\nbudget = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[run]\nworkers = 0\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[dr]\nc_dr = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[physics]\njoint_damping = 1 2 3\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[physics]\nkey_press_threshold = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[modes]\nmode = telepathy\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[experiment]\nc_dr_grid = 0 2\n"), ConfigError);
  EXPECT_THROW(parse_run_config("seed = 1\n"), ConfigError);
  EXPECT_THROW(parse_run_config("[run\n"), ConfigError);
  EXPECT_THROW(load_run_config(fs::path("/nonexistent/x.ini")), ConfigError);
}

TEST(RunConfig, OverrideSyntax) {
  EXPECT_EQ(parse_override("trainer.budget=10"), (Override{"trainer.budget", "10"}));
  EXPECT_THROW(parse_override("trainer.budget"), UsageError);
}

TEST(RunConfig, RelativePathsResolveAgainstFile) {
  const fs::path dir = fs::temp_directory_path() / "pianorl_cfg_paths";
  fs::remove_all(dir);
  fs::create_directories(dir / "sub");
  PhysicalParams p = nominal_params();
  p.key_spring_stiffness = 2.25;
  save_constants(p, dir / "sub" / "phys.ini");
  {
    std::ofstream f(dir / "run.ini");
    f << "[physics]\nconstants = sub/phys.ini\n[experiment]\nsongs = a.txt sub/b.txt\n";
  }
  const RunConfig cfg = load_run_config(dir / "run.ini");
  EXPECT_EQ(cfg.dr.nominal.key_spring_stiffness, 2.25);
  ASSERT_EQ(cfg.experiment.songs.size(), 2u);
  EXPECT_EQ(cfg.experiment.songs[0], dir / "a.txt");
  EXPECT_EQ(cfg.experiment.songs[1], dir / "sub" / "b.txt");
}

TEST(RunConfig, ExplicitPhysicsKeysRefineConstantsFile) {
  const std::string text = "[physics]\nkey_spring_stiffness = 3\nconstants = " +
                           (kData / "physics_constants_v1.ini").string() + "\n";
  EXPECT_EQ(parse_run_config(text).dr.nominal.key_spring_stiffness, 3.0);
}

TEST(RunConfig, RenderRoundTrips) {
  const RunConfig a = parse_run_config(
      "[run]\nseed = 3\n[trainer]\nlearning_rate = 0.00123\ncritic_hidden = 8 8\n"
      "[dr]\nc_dr = 0.3\n[experiment]\nmodes = mirror real\n");
  const std::string text = render_run_config(a);
  const RunConfig b = parse_run_config(text);
  EXPECT_EQ(render_run_config(b), text);
  EXPECT_EQ(b.trainer.learning_rate, 0.00123);
  EXPECT_EQ(config_hash(b.trainer, b.dr), config_hash(a.trainer, a.dr));
}

TEST(RunConfig, EveryKeyIsDocumentedAndUnique) {
  std::set<std::string> seen;
  for (const auto& k : config_keys()) {
    EXPECT_TRUE(seen.insert(k.name).second) << k.name;
    EXPECT_FALSE(k.help.empty()) << k.name;
    EXPECT_NE(k.name.find('.'), std::string::npos) << k.name;
  }
}

TEST(RunConfig, ShippedDeskConfigLoads) {
  const RunConfig cfg = load_run_config(kData / "configs" / "desk.ini");
  EXPECT_EQ(cfg.trainer.budget, 200000u);
  EXPECT_EQ(cfg.experiment.songs.size(), 5u);
  for (const auto& s : cfg.experiment.songs) EXPECT_TRUE(fs::exists(s)) << s;
  EXPECT_TRUE(fs::exists(cfg.experiment.dr_song));
}

TEST(RunConfig, DerivedSeedsFeedTrainerAndDr) {
  const RunConfig cfg = parse_run_config("[dr]\nc_dr = 0.2\n");
  EXPECT_EQ(trainer_for(cfg, 5).seed, 5u);
  const DRConfig d = dr_for(cfg, 0.7, 5);
  EXPECT_EQ(d.seed, 5u);
  EXPECT_DOUBLE_EQ(d.c_dr, 0.7);
}

}  // namespace
}  // namespace pianorl

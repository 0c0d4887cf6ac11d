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
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "pianorl/song.hpp"
#include "support.hpp"

namespace pianorl {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::kSongDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pianorl_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void expect_error_line(const Outcome& o, int code) {
  EXPECT_EQ(o.code, code) << o.err;
  const auto nl = o.err.find('\n');
  ASSERT_NE(nl, std::string::npos);
  EXPECT_EQ(nl + 1, o.err.size()) << "error must be one line";
  const json j = json::parse(o.err);
  EXPECT_EQ(j.at("exit_code").get<int>(), code);
  EXPECT_FALSE(j.at("message").get<std::string>().empty());
}

fs::path small_checkpoint_file(const fs::path& dir, float fill = 0.0f) {
  NetworkConfig net;
  net.actor_hidden = {16};
  net.critic_hidden = {8};
  Checkpoint c;
  c.actor = actor_spec(net);
  c.critic = critic_spec(net);
  nn::Rng rng(4);
  nn::Mlp<float> actor(c.actor);
  actor.initialize(rng, 2.0);
  {
    const auto& p = actor.parameters();
    c.actor_params.assign(p.data(), p.data() + p.size());
  }
  if (fill != 0.0f) std::fill(c.actor_params.begin(), c.actor_params.end(), fill);
  const fs::path p = dir / "policy.ckpt";
  save_checkpoint(c, p);
  return p;
}

TEST(Cli, HelpDocumentsEveryFlag) {
  cli::Options opts;
  const auto app = cli::make_app(opts);
  const Outcome all = run_cli({"--help-all"});
  ASSERT_EQ(all.code, 0);
  auto check = [&](const CLI::App* a) {
    for (const CLI::Option* opt : a->get_options()) {
      for (const auto& name : opt->get_lnames()) {
        EXPECT_NE(all.out.find("--" + name), std::string::npos) << a->get_name() << " --" << name;
      }
      EXPECT_FALSE(opt->get_description().empty()) << a->get_name() << " " << opt->get_name();
      EXPECT_NE(all.out.find(opt->get_description()), std::string::npos) << opt->get_name();
    }
  };
  check(app.get());
  int subs = 0;
  for (const CLI::App* sub : app->get_subcommands({})) {
    ++subs;
    EXPECT_NE(all.out.find(sub->get_name()), std::string::npos);
    check(sub);
  }
  EXPECT_EQ(subs, 8);
}

TEST(Cli, SubcommandHelpExitsZero) {
  const Outcome o = run_cli({"eval", "--help"});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("--plant-scale"), std::string::npos);
}

TEST(Cli, ScorePerfectLogPrintsUnitF1) {
  const fs::path dir = scratch("score");
  {
    std::ofstream f(dir / "perfect.jsonl");
    f << R"({"t":0,"pressed":[24],"targets":[24]})" << '\n'
      << R"({"t":1,"pressed":[24,26],"targets":[24,26]})" << '\n'
      << R"({"t":2,"pressed":[],"targets":[]})" << '\n';
  }
  const Outcome o = run_cli({"score", "--log", (dir / "perfect.jsonl").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out, "precision=1.000000 recall=1.000000 f1=1.000000 steps=3 aggregation=micro\n");
}

TEST(Cli, ConvertSongTextMidiTextIsIdentity) {
  const fs::path dir = scratch("convert");
  for (const char* name : {"toy", "c_major", "d_major", "twinkle", "chords"}) {
    const fs::path src = kSongDir / (std::string(name) + ".txt");
    const fs::path mid = dir / (std::string(name) + ".mid");
    const fs::path back = dir / (std::string(name) + ".txt");
    ASSERT_EQ(run_cli({"convert-song", "--in", src.string(), "--out", mid.string()}).code, 0);
    ASSERT_EQ(run_cli({"convert-song", "--in", mid.string(), "--out", back.string()}).code, 0);
    EXPECT_EQ(slurp(back), render_song_text(load_song_events(src))) << name;
    EXPECT_EQ(load_song_events(back), load_song_events(src)) << name;
  }
}

std::vector<json> plant_scores(const std::string& out) {
  std::vector<json> v;
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    const json j = json::parse(line);
    if (j.contains("plant")) v.push_back(j["plant"]);
  }
  return v;
}

TEST(Cli, HybridOnIdenticalPlantEqualsMirror) {
  const fs::path dir = scratch("modes");
  const fs::path ckpt = small_checkpoint_file(dir);
  std::vector<std::string> base = {"eval", "--ckpt", ckpt.string(), "--song",
                                   (kSongDir / "twinkle.txt").string(), "--runs", "2",
                                   "--plant-scale", "0", "--set", "modes.plant_jitter=0"};
  auto with_mode = [&](const std::string& m) {
    auto a = base;
    a.insert(a.end(), {"--mode", m});
    return run_cli(a);
  };
  const Outcome hybrid = with_mode("hybrid");
  const Outcome mirror = with_mode("mirror");
  ASSERT_EQ(hybrid.code, 0) << hybrid.err;
  ASSERT_EQ(mirror.code, 0) << mirror.err;
  const auto h = plant_scores(hybrid.out);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h, plant_scores(mirror.out));
}

TEST(Cli, EvalIsDeterministic) {
  const fs::path dir = scratch("det");
  const fs::path ckpt = small_checkpoint_file(dir);
  const std::vector<std::string> args = {"eval", "--ckpt", ckpt.string(), "--song",
                                         (kSongDir / "toy.txt").string(), "--mode", "hybrid",
                                         "--runs", "2", "--seed", "3"};
  const Outcome a = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(run_cli(args).out, a.out);
}

TEST(Cli, RolloutThenScoreAgree) {
  const fs::path dir = scratch("rollout");
  const fs::path ckpt = small_checkpoint_file(dir);
  const fs::path log = dir / "ep.jsonl";
  const Outcome r = run_cli({"rollout", "--ckpt", ckpt.string(), "--song",
                             (kSongDir / "c_major.txt").string(), "--out", log.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  const Outcome s = run_cli({"score", "--log", log.string()});
  ASSERT_EQ(s.code, 0) << s.err;
  std::ostringstream want;
  want << std::fixed << std::setprecision(6) << "f1=" << j["sim"]["f1"].get<double>() << " ";
  EXPECT_NE(s.out.find(want.str()), std::string::npos) << s.out;
}

TEST(Cli, PrintConfigReflectsFlags) {
  const Outcome o = run_cli({"--print-config", "--seed", "12", "train", "--cdr", "0.25", "--steps", "777"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("seed = 12"), std::string::npos);
  EXPECT_NE(o.out.find("c_dr = 0.25"), std::string::npos);
  EXPECT_NE(o.out.find("budget = 777"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  expect_error_line(run_cli({"train", "--bogus"}), cli::kUsage);
  expect_error_line(run_cli({}), cli::kUsage);
  expect_error_line(run_cli({"train", "--out", "x.ckpt"}), cli::kUsage);
}

TEST(Cli, ConfigErrorsExitThree) {
  expect_error_line(run_cli({"score", "--log", "/nonexistent/log.jsonl"}), cli::kConfig);
  expect_error_line(run_cli({"train", "--song", "/nonexistent/s.txt", "--out", "x.ckpt"}), cli::kConfig);
  expect_error_line(run_cli({"--config", "/nonexistent/c.ini", "train", "--song", "a", "--out", "b"}),
                    cli::kConfig);
  expect_error_line(run_cli({"--set", "trainer.nope=1", "--print-config", "train"}), cli::kConfig);
}

TEST(Cli, PlantErrorsExitFour) {
  const fs::path dir = scratch("plant");
  const fs::path ckpt = small_checkpoint_file(dir);
  expect_error_line(run_cli({"eval", "--ckpt", ckpt.string(), "--song", (kSongDir / "toy.txt").string(),
                             "--mode", "real", "--plant", "tcp:127.0.0.1:1"}),
                    cli::kPlant);
}

TEST(Cli, NumericalFaultExitsFive) {
  const fs::path dir = scratch("nan");
  const fs::path ckpt = small_checkpoint_file(dir, std::numeric_limits<float>::quiet_NaN());
  expect_error_line(run_cli({"rollout", "--ckpt", ckpt.string(), "--song",
                             (kSongDir / "toy.txt").string(), "--out", (dir / "ep.jsonl").string()}),
                    cli::kNumerical);
}

}  // namespace
}  // namespace pianorl

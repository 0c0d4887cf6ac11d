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

#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pianorl/bridge.hpp"
#include "pianorl/config.hpp"
#include "pianorl/error.hpp"
#include "pianorl/exec_modes.hpp"
#include "pianorl/experiments.hpp"
#include "pianorl/trainer.hpp"

namespace pianorl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fixed6(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

json scores_json(const Scores& s) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"precision", num(s.precision)}, {"recall", num(s.recall)}, {"f1", num(s.f1)}};
}

RunConfig load_config(const Options& o) {
  std::vector<Override> overrides;
  for (const auto& s : o.set) overrides.push_back(parse_override(s));
  if (o.seed >= 0) overrides.emplace_back("run.seed", std::to_string(o.seed));
  if (o.workers > 0) overrides.emplace_back("run.workers", std::to_string(o.workers));
  if (o.cdr >= 0.0) overrides.emplace_back("dr.c_dr", std::to_string(o.cdr));
  if (o.steps >= 0) overrides.emplace_back("trainer.budget", std::to_string(o.steps));
  if (!o.mode.empty()) {
    overrides.emplace_back("modes.mode", o.mode);
    overrides.emplace_back("experiment.mode", o.mode);
  }
  if (!o.plant.empty()) overrides.emplace_back("modes.plant", o.plant);
  if (o.plant_scale >= 0.0) overrides.emplace_back("modes.plant_scale", std::to_string(o.plant_scale));
  if (o.runs > 0) overrides.emplace_back("experiment.runs", std::to_string(o.runs));
  if (o.seeds > 0) overrides.emplace_back("experiment.seeds", std::to_string(o.seeds));
  if (!o.aggregation.empty()) overrides.emplace_back("experiment.aggregation", o.aggregation);
  if (!o.out_dir.empty()) overrides.emplace_back("experiment.out_dir", o.out_dir);
  if (!o.checkpoint_dir.empty()) overrides.emplace_back("experiment.checkpoint_dir", o.checkpoint_dir);
  if (!o.songs.empty()) {
    std::string joined;
    for (const auto& s : o.songs) joined += s + " ";
    overrides.emplace_back("experiment.songs", joined);
  }
  if (!o.grid.empty()) {
    std::string joined;
    for (double c : o.grid) joined += std::to_string(c) + " ";
    overrides.emplace_back("experiment.c_dr_grid", joined);
  }
  std::optional<fs::path> path;
  if (!o.config.empty()) path = o.config;
  RunConfig cfg = load_run_config(path, overrides);
  if (o.workers <= 0 && !path) {
    cfg.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  return cfg;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required flag ") + flag);
}

// Plant for evaluation runs: the proxy simulator or a device over TCP.
struct PlantHandle {
  std::unique_ptr<Plant> plant;
  std::unique_ptr<FdTransport> transport;
};

PlantHandle open_plant(const RunConfig& cfg, const ExperimentContext& ctx, int run) {
  PlantHandle h;
  if (cfg.plant == "internal") {
    h.plant = std::make_unique<InternalPlant>(plant_params_for_run(ctx, cfg.seed, run));
    return h;
  }
  const std::string spec = cfg.plant.substr(4);
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos) throw ConfigError("plant must be tcp:<host>:<port>");
  int port = 0;
  try {
    port = std::stoi(spec.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad plant port in " + cfg.plant);
  }
  h.transport = FdTransport::connect_tcp(spec.substr(0, colon), port);
  h.plant = std::make_unique<BridgePlant>(*h.transport, cfg.bridge);
  return h;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.song, "--song");
  require(o.out, "--out");
  const RunConfig cfg = load_config(o);
  const SongTimeline song = load_song(o.song);
  const DRConfig dr = dr_for(cfg, cfg.dr.c_dr, cfg.seed);
  const TrainerConfig tc = trainer_for(cfg, cfg.seed);
  const TrainResult r = train(song, dr, tc, [&](const CurveRow& row) {
    if (!o.quiet) {
      err << "step " << row.step << " eval_f1 " << fixed6(row.eval.f1) << " temperature "
          << row.temperature << '\n';
    }
  });
  save_checkpoint(r.best, o.out);
  if (!o.final_out.empty()) save_checkpoint(r.final, o.final_out);
  if (!o.curve.empty()) {
    std::ofstream f(o.curve);
    if (!f) throw ConfigError("cannot write " + o.curve);
    write_learning_curve_csv(f, r.curve);
  }
  json j{{"checkpoint", o.out},
         {"best_eval_f1", r.best_eval_f1},
         {"env_steps", r.env_steps},
         {"episodes", r.episodes},
         {"dr_clamps", r.dr_clamps},
         {"config_hash", hex64(r.final.config_hash)},
         {"diverged", r.diverged}};
  out << j.dump() << '\n';
  if (r.diverged) throw NumericalFault("training diverged: " + r.message);
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream&) {
  require(o.ckpt, "--ckpt");
  require(o.song, "--song");
  const RunConfig cfg = load_config(o);
  const ExperimentContext ctx = experiment_context(cfg);
  const SongTimeline song = load_song(o.song);
  const PolicyNet policy = load_checkpoint(o.ckpt).policy();
  nn::Rng unused(0);
  const PolicyFn fn = [&](const Observation& obs) { return act(policy, obs, true, unused); };
  std::ofstream log_file;
  if (!o.log.empty()) {
    log_file.open(o.log);
    if (!log_file) throw ConfigError("cannot write " + o.log);
  }
  std::vector<ResultRow> rows;
  bool aborted = false;
  for (int run = 0; run < cfg.experiment.runs; ++run) {
    PlantHandle plant = open_plant(cfg, ctx, run);
    const ModeEpisode ep = run_mode_episode(fn, song, cfg.modes, *plant.plant,
                                            log_file.is_open() ? &log_file : nullptr, cfg.seed);
    const Aggregation agg = cfg.experiment.aggregation;
    const Scores sim = cfg.modes.mode == ExecMode::kRealWorld ? ep.sim : ep.sim_scorer.scores(agg);
    const Scores pl = ep.plant_scorer.scores(agg);
    json j{{"run", run},
           {"mode", mode_name(cfg.modes.mode)},
           {"sim", scores_json(sim)},
           {"plant", scores_json(pl)},
           {"divergence", ep.divergence},
           {"stale_steps", ep.stale_steps},
           {"aborted", ep.aborted}};
    if (ep.aborted) j["abort_message"] = ep.abort_message;
    out << j.dump() << '\n';
    aborted = aborted || ep.aborted;
    ResultRow row;
    row.experiment = "eval";
    row.side = "plant";
    row.scores = pl;
    row.status = ep.aborted ? "aborted" : "ok";
    rows.push_back(row);
  }
  const auto summary = summarize(rows);
  if (!summary.empty()) {
    out << json{{"summary", "plant"}, {"n", summary[0].n}, {"f1_mean", summary[0].mean.f1},
                {"f1_std", summary[0].stddev.f1}}.dump()
        << '\n';
  }
  if (aborted) throw PlantError("episode aborted by the plant");
  return kOk;
}

int cmd_rollout(const Options& o, std::ostream& out, std::ostream&) {
  require(o.ckpt, "--ckpt");
  require(o.song, "--song");
  require(o.out, "--out");
  const RunConfig cfg = load_config(o);
  const SongTimeline song = load_song(o.song);
  const PolicyNet policy = load_checkpoint(o.ckpt).policy();
  nn::Rng unused(0);
  const PolicyFn fn = [&](const Observation& obs) { return act(policy, obs, true, unused); };
  std::ofstream log(o.out);
  if (!log) throw ConfigError("cannot write " + o.out);
  if (o.mode.empty()) {
    PianoEnv env(song, cfg.trainer.env);
    const EpisodeSummary s = run_episode(env, cfg.dr.nominal, fn, &log, cfg.seed);
    out << json{{"log", o.out}, {"steps", s.steps}, {"total_reward", s.total_reward},
                {"sim", scores_json(s.scorer.scores(cfg.experiment.aggregation))}}.dump()
        << '\n';
    if (s.fault) throw NumericalFault("integration fault during rollout");
    return kOk;
  }
  const ExperimentContext ctx = experiment_context(cfg);
  PlantHandle plant = open_plant(cfg, ctx, 0);
  const ModeEpisode ep = run_mode_episode(fn, song, cfg.modes, *plant.plant, &log, cfg.seed);
  out << json{{"log", o.out}, {"mode", mode_name(cfg.modes.mode)},
              {"plant", scores_json(ep.plant)}, {"aborted", ep.aborted}}.dump()
      << '\n';
  if (ep.aborted) throw PlantError(ep.abort_message);
  return kOk;
}

int cmd_score(const Options& o, std::ostream& out, std::ostream&) {
  require(o.log, "--log");
  std::ifstream in(o.log);
  if (!in) throw ConfigError("cannot open log: " + o.log);
  const Aggregation agg = o.aggregation.empty() ? Aggregation::kMicro : parse_aggregation(o.aggregation);
  const EpisodeScorer scorer = score_log(in, o.side);
  const Scores s = scorer.scores(agg);
  out << "precision=" << fixed6(s.precision) << " recall=" << fixed6(s.recall)
      << " f1=" << fixed6(s.f1) << " steps=" << scorer.steps() << " aggregation="
      << aggregation_name(agg) << '\n';
  return kOk;
}

int cmd_convert(const Options& o, std::ostream& out, std::ostream&) {
  require(o.in, "--in");
  require(o.out, "--out");
  const auto events = load_song_events(o.in);
  const auto ext = fs::path(o.out).extension().string();
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + o.out);
  if (ext == ".mid" || ext == ".midi") {
    const auto bytes = write_midi(events);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  } else {
    f << render_song_text(events);
  }
  out << json{{"in", o.in}, {"out", o.out}, {"notes", events.size() / 2}}.dump() << '\n';
  return kOk;
}

int run_experiment(const Options& o, std::ostream& out, std::ostream& err, const std::string& name) {
  RunConfig cfg = load_config(o);
  if (!o.song.empty()) cfg.experiment.dr_song = o.song;
  ExperimentContext ctx = experiment_context(cfg);
  const ExperimentLog log = [&](const std::string& msg) {
    if (!o.quiet) err << msg << '\n';
  };
  ExperimentResult result;
  if (name == "song_suite") result = run_song_suite(ctx, log);
  else if (name == "mode_ablation") result = run_mode_ablation(ctx, log);
  else result = run_dr_sweep(ctx, log);
  write_experiment_outputs(result, cfg.experiment.out_dir, name);
  json j{{"experiment", name},
         {"rows", result.rows.size()},
         {"missing", result.missing},
         {"out_dir", cfg.experiment.out_dir.string()}};
  out << j.dump() << '\n';
  return kOk;
}

}  // namespace

std::unique_ptr<CLI::App> make_app(Options& o) {
  auto app = std::make_unique<CLI::App>("Robot piano playing: training, execution modes and experiments.",
                                        "pianorl");
  app->set_help_all_flag("--help-all", "Print help for every subcommand");
  app->require_subcommand(1);
  app->fallthrough();
  app->option_defaults()->always_capture_default();
  app->add_option("--config", o.config, "Run configuration file ([section] key = value)");
  app->add_option("--set", o.set, "Override one config key: section.key=value (repeatable)");
  app->add_option("--seed", o.seed, "Seed for every random stream");
  app->add_option("--workers", o.workers, "Parallel workers (default: hardware threads)");
  app->add_flag("--quiet", o.quiet, "Suppress progress messages on stderr");
  app->add_flag("--print-config", o.print_config, "Print the configuration the subcommand would use and exit");

  auto* train = app->add_subcommand("train", "Train a policy on one song");
  train->add_option("--song", o.song, "Song file (.txt or .mid)");
  train->add_option("--cdr", o.cdr, "Domain randomization intensity in [0, 1]");
  train->add_option("--steps", o.steps, "Training budget (environment steps by default)");
  train->add_option("--out", o.out, "Checkpoint path for the best evaluation");
  train->add_option("--final", o.final_out, "Checkpoint path for the last step");
  train->add_option("--curve", o.curve, "Learning-curve CSV path");

  auto* eval = app->add_subcommand("eval", "Evaluate a checkpoint in an execution mode");
  eval->add_option("--ckpt", o.ckpt, "Checkpoint file");
  eval->add_option("--song", o.song, "Song file");
  eval->add_option("--mode", o.mode, "mirror, hybrid or real");
  eval->add_option("--runs", o.runs, "Plant runs");
  eval->add_option("--plant", o.plant, "internal or tcp:<host>:<port>");
  eval->add_option("--plant-scale", o.plant_scale, "Proxy plant perturbation scale (0 = identical)");
  eval->add_option("--log", o.log, "Episode log path (JSON lines)");
  eval->add_option("--aggregation", o.aggregation, "micro or per_step");

  auto* rollout = app->add_subcommand("rollout", "Write an episode log of a checkpoint");
  rollout->add_option("--ckpt", o.ckpt, "Checkpoint file");
  rollout->add_option("--song", o.song, "Song file");
  rollout->add_option("--out", o.out, "Episode log path (JSON lines)");
  rollout->add_option("--mode", o.mode, "Execution mode; omitted runs the simulator alone");
  rollout->add_option("--plant", o.plant, "internal or tcp:<host>:<port>");
  rollout->add_option("--plant-scale", o.plant_scale, "Proxy plant perturbation scale");

  auto* score = app->add_subcommand("score", "Re-score an episode log");
  score->add_option("--log", o.log, "Episode log path");
  score->add_option("--side", o.side, "sim or plant (mode logs only)");
  score->add_option("--aggregation", o.aggregation, "micro or per_step");

  auto* convert = app->add_subcommand("convert-song", "Convert between MIDI and the text song format");
  convert->add_option("--in", o.in, "Input song (.mid/.midi or text)");
  convert->add_option("--out", o.out, "Output song; the extension picks the format");

  auto* suite = app->add_subcommand("suite", "Evaluate trained checkpoints over a song suite");
  auto* compare = app->add_subcommand("compare-modes", "Execution-mode ablation over songs");
  for (auto* sub : {suite, compare}) {
    sub->add_option("--songs", o.songs, "Song files");
    sub->add_option("--checkpoint-dir", o.checkpoint_dir, "Directory of trained checkpoints");
    sub->add_option("--out-dir", o.out_dir, "Directory for CSV and SVG outputs");
    sub->add_option("--runs", o.runs, "Plant runs per checkpoint");
    sub->add_option("--seeds", o.seeds, "Trained seeds per song");
    sub->add_option("--aggregation", o.aggregation, "micro or per_step");
  }
  suite->add_option("--mode", o.mode, "Execution mode");

  auto* sweep = app->add_subcommand("dr-sweep", "Train and evaluate over DR intensities");
  sweep->add_option("--song", o.song, "Song trained in every cell");
  sweep->add_option("--grid", o.grid, "DR intensities (default 0.0 .. 1.0 in 0.1 steps)");
  sweep->add_option("--steps", o.steps, "Training budget per cell");
  sweep->add_option("--checkpoint-dir", o.checkpoint_dir, "Where cell checkpoints are written");
  sweep->add_option("--out-dir", o.out_dir, "Directory for CSV and SVG outputs");
  sweep->add_option("--aggregation", o.aggregation, "micro or per_step");
  return app;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  auto app = make_app(o);
  auto fail = [&](const char* kind, int code, const std::string& msg) {
    err << json{{"error", kind}, {"exit_code", code}, {"message", msg}}.dump() << '\n';
    return code;
  };
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app->parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = app.get();
    for (const auto* sub : app->get_subcommands()) target = sub;
    out << app->help(target == app.get() ? "" : target->get_name());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app->help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail("usage", kUsage, e.what());
  }
  try {
    if (o.print_config) {
      out << render_run_config(load_config(o));
      return kOk;
    }
    const std::string sub = app->get_subcommands().front()->get_name();
    if (sub == "train") return cmd_train(o, out, err);
    if (sub == "eval") return cmd_eval(o, out, err);
    if (sub == "rollout") return cmd_rollout(o, out, err);
    if (sub == "score") return cmd_score(o, out, err);
    if (sub == "convert-song") return cmd_convert(o, out, err);
    if (sub == "suite") return run_experiment(o, out, err, "song_suite");
    if (sub == "compare-modes") return run_experiment(o, out, err, "mode_ablation");
    return run_experiment(o, out, err, "dr_sweep");
  } catch (const UsageError& e) {
    return fail("usage", kUsage, e.what());
  } catch (const ConfigError& e) {
    return fail("config", kConfig, e.what());
  } catch (const PlantError& e) {
    return fail("plant", kPlant, e.what());
  } catch (const NumericalFault& e) {
    return fail("numerical", kNumerical, e.what());
  } catch (const std::exception& e) {
    return fail("internal", kFailure, e.what());
  }
}

}  // namespace pianorl::cli

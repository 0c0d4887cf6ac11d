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

#include "pianorl/experiments.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "pianorl/error.hpp"
#include "pianorl/svg.hpp"

#ifndef PIANORL_GIT_DESCRIBE
#define PIANORL_GIT_DESCRIBE "unknown"
#endif

namespace pianorl {
namespace {

std::uint64_t fnv(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fixed2(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

std::string song_label(const std::filesystem::path& p) { return p.stem().string(); }

Scores nan_scores() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {nan, nan, nan};
}

// Serializes progress messages from worker threads.
class SafeLog {
 public:
  explicit SafeLog(const ExperimentLog& log) : log_(log) {}
  void operator()(const std::string& msg) const {
    if (!log_) return;
    std::lock_guard<std::mutex> lock(mu_);
    log_(msg);
  }

 private:
  const ExperimentLog& log_;
  mutable std::mutex mu_;
};

DRConfig cell_dr(const ExperimentContext& ctx, double c_dr, std::uint64_t seed) {
  DRConfig d = ctx.dr;
  d.c_dr = c_dr;
  d.seed = seed;
  return d;
}

ResultRow make_row(const std::string& experiment, const std::string& song, ExecMode mode,
                   double c_dr, std::uint64_t seed, int run, const std::string& side,
                   const Scores& s, const ExperimentContext& ctx, const std::string& cfg_hash,
                   const std::string& drh) {
  ResultRow r;
  r.experiment = experiment;
  r.song = song;
  r.mode = mode_name(mode);
  r.c_dr = c_dr;
  r.seed = seed;
  r.run = run;
  r.side = side;
  r.scores = s;
  r.aggregation = ctx.experiment.aggregation;
  r.config_hash = cfg_hash;
  r.dr_hash = drh;
  r.git_describe = build_git_describe();
  return r;
}

// Plant (and shadow) evaluations of one policy.
std::vector<ResultRow> evaluate_runs(const ExperimentContext& ctx, const std::string& experiment,
                                     const std::string& song, const SongTimeline& timeline,
                                     const PolicyNet& policy, ExecMode mode, double c_dr,
                                     std::uint64_t seed, int runs, const std::string& cfg_hash) {
  std::vector<ResultRow> rows;
  const std::string drh = dr_hash(cell_dr(ctx, c_dr, seed));
  nn::Rng unused(0);
  const PolicyFn fn = [&](const Observation& o) { return act(policy, o, true, unused); };
  ModeConfig mc = ctx.modes;
  mc.mode = mode;
  mc.shadow_params = ctx.dr.nominal;
  for (int run = 0; run < runs; ++run) {
    InternalPlant plant(plant_params_for_run(ctx, seed, run));
    const ModeEpisode ep = run_mode_episode(fn, timeline, mc, plant, nullptr, seed);
    const std::string status = ep.aborted ? "aborted" : "ok";
    if (mode != ExecMode::kRealWorld) {
      ResultRow r = make_row(experiment, song, mode, c_dr, seed, run, "sim",
                             ep.sim_scorer.scores(ctx.experiment.aggregation), ctx, cfg_hash, drh);
      r.divergence = ep.divergence;
      r.status = status;
      rows.push_back(r);
    }
    ResultRow r = make_row(experiment, song, mode, c_dr, seed, run, "plant",
                           ep.plant_scorer.scores(ctx.experiment.aggregation), ctx, cfg_hash, drh);
    r.divergence = ep.divergence;
    r.status = status;
    rows.push_back(r);
  }
  return rows;
}

struct CheckpointCell {
  std::filesystem::path song;
  ExecMode mode;
  double c_dr;
  std::uint64_t seed;
};

ExperimentResult run_checkpoint_grid(const ExperimentContext& ctx, const std::string& experiment,
                                     const std::vector<CheckpointCell>& cells,
                                     const ExperimentLog& log) {
  SafeLog safe(log);
  std::vector<std::vector<ResultRow>> out(cells.size());
  std::vector<std::string> missing(cells.size());
  parallel_for(cells.size(), ctx.workers, [&](std::size_t i) {
    const CheckpointCell& c = cells[i];
    const auto path = checkpoint_path(ctx.experiment.checkpoint_dir, c.song, c.c_dr, c.seed);
    const std::string label = song_label(c.song);
    if (!std::filesystem::exists(path)) {
      missing[i] = path.string();
      ResultRow r = make_row(experiment, label, c.mode, c.c_dr, c.seed, -1, "plant", nan_scores(),
                             ctx, "", dr_hash(cell_dr(ctx, c.c_dr, c.seed)));
      r.status = "missing";
      out[i].push_back(r);
      safe("missing checkpoint " + path.string());
      return;
    }
    const Checkpoint ckpt = load_checkpoint(path);
    const SongTimeline timeline = load_song(c.song);
    out[i] = evaluate_runs(ctx, experiment, label, timeline, ckpt.policy(), c.mode, c.c_dr, c.seed,
                           ctx.experiment.runs, hex64(ckpt.config_hash));
    safe(experiment + " " + label + " " + mode_name(c.mode) + " seed " + std::to_string(c.seed) +
         " done");
  });
  ExperimentResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    result.rows.insert(result.rows.end(), out[i].begin(), out[i].end());
    if (!missing[i].empty()) result.missing.push_back(missing[i]);
  }
  result.summary = summarize(result.rows);
  return result;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

constexpr const char* kResultsHeader =
    "experiment,song,mode,c_dr,seed,run,side,precision,recall,f1,aggregation,divergence,status,"
    "config_hash,dr_hash,git_describe";

}  // namespace

std::string build_git_describe() { return PIANORL_GIT_DESCRIBE; }

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string dr_hash(const DRConfig& dr) {
  std::ostringstream os;
  os << std::setprecision(17) << dr.c_dr << '|' << dr.seed << '|' << params_hash(dr.nominal) << '|'
     << dr.spreads.joint_damping << '|' << dr.spreads.joint_stiffness << '|'
     << dr.spreads.key_spring << '|' << dr.spreads.press_threshold << '|' << dr.spreads.friction
     << '|' << dr.spreads.piano_height << '|' << dr.spreads.hand_start;
  return hex64(fnv(os.str()));
}

int runs_for_c_dr(double c_dr) {
  constexpr double eps = 1e-9;
  if (c_dr >= 0.3 - eps && c_dr <= 0.7 + eps) return 7;
  if (c_dr >= 0.2 - eps && c_dr <= 0.8 + eps) return 5;
  return 3;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir,
                                      const std::filesystem::path& song, double c_dr,
                                      std::uint64_t seed) {
  return dir / (song_label(song) + "_cdr" + fixed2(c_dr) + "_seed" + std::to_string(seed) + ".ckpt");
}

PhysicalParams plant_params_for_run(const ExperimentContext& ctx, std::uint64_t seed, int run) {
  const PhysicalParams base =
      perturbed_params(ctx.dr.nominal, ctx.experiment.plant_scale, ctx.experiment.plant_profile);
  if (ctx.experiment.plant_jitter <= 0.0) return base;
  DRConfig jitter;
  jitter.c_dr = ctx.experiment.plant_jitter;
  jitter.nominal = base;
  jitter.spreads = ctx.dr.spreads;
  jitter.seed = seed * 0x9E3779B97F4A7C15ULL + 0x5eed;
  return sample_params(jitter, static_cast<std::uint64_t>(run)).params;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<Scores>> samples;
  for (const auto& r : rows) {
    if (r.status != "ok" || !std::isfinite(r.scores.f1)) continue;
    std::ostringstream key;
    key << r.experiment << '\x1f' << r.song << '\x1f' << r.mode << '\x1f'
        << std::setprecision(17) << r.c_dr << '\x1f' << r.side;
    auto [it, fresh] = index.emplace(key.str(), out.size());
    if (fresh) {
      SummaryRow s;
      s.experiment = r.experiment;
      s.song = r.song;
      s.mode = r.mode;
      s.c_dr = r.c_dr;
      s.side = r.side;
      out.push_back(s);
      samples.emplace_back();
    }
    samples[it->second].push_back(r.scores);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& xs = samples[i];
    const double n = static_cast<double>(xs.size());
    Scores mean{0.0, 0.0, 0.0};
    for (const auto& s : xs) {
      mean.precision += s.precision;
      mean.recall += s.recall;
      mean.f1 += s.f1;
    }
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    Scores sd{0.0, 0.0, 0.0};
    if (xs.size() > 1) {
      for (const auto& s : xs) {
        sd.precision += (s.precision - mean.precision) * (s.precision - mean.precision);
        sd.recall += (s.recall - mean.recall) * (s.recall - mean.recall);
        sd.f1 += (s.f1 - mean.f1) * (s.f1 - mean.f1);
      }
      sd.precision = std::sqrt(sd.precision / (n - 1));
      sd.recall = std::sqrt(sd.recall / (n - 1));
      sd.f1 = std::sqrt(sd.f1 / (n - 1));
    }
    out[i].n = xs.size();
    out[i].mean = mean;
    out[i].stddev = sd;
  }
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.song << ',' << r.mode << ',' << r.c_dr << ',' << r.seed << ','
        << r.run << ',' << r.side << ',' << r.scores.precision << ',' << r.scores.recall << ','
        << r.scores.f1 << ',' << aggregation_name(r.aggregation) << ',' << r.divergence << ','
        << r.status << ',' << r.config_hash << ',' << r.dr_hash << ',' << r.git_describe << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "experiment,song,mode,c_dr,side,n,precision_mean,precision_std,recall_mean,recall_std,"
         "f1_mean,f1_std\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.experiment << ',' << r.song << ',' << r.mode << ',' << r.c_dr << ',' << r.side << ','
        << r.n << ',' << r.mean.precision << ',' << r.stddev.precision << ',' << r.mean.recall
        << ',' << r.stddev.recall << ',' << r.mean.f1 << ',' << r.stddev.f1 << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw ConfigError("results CSV: unexpected header");
  }
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 16) throw ConfigError("results CSV line " + std::to_string(lineno) + ": 16 fields expected");
    try {
      ResultRow r;
      r.experiment = f[0];
      r.song = f[1];
      r.mode = f[2];
      r.c_dr = parse_double(f[3]);
      r.seed = std::stoull(f[4]);
      r.run = std::stoi(f[5]);
      r.side = f[6];
      r.scores = {parse_double(f[7]), parse_double(f[8]), parse_double(f[9])};
      r.aggregation = parse_aggregation(f[10]);
      r.divergence = std::stoull(f[11]);
      r.status = f[12];
      r.config_hash = f[13];
      r.dr_hash = f[14];
      r.git_describe = f[15];
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ConfigError("results CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

ExperimentResult run_song_suite(const ExperimentContext& ctx, const ExperimentLog& log) {
  std::vector<CheckpointCell> cells;
  for (const auto& song : ctx.experiment.songs) {
    for (int s = 0; s < ctx.experiment.seeds; ++s) {
      cells.push_back({song, ctx.experiment.mode, ctx.experiment.suite_c_dr,
                       ctx.seed + static_cast<std::uint64_t>(s)});
    }
  }
  return run_checkpoint_grid(ctx, "song_suite", cells, log);
}

ExperimentResult run_mode_ablation(const ExperimentContext& ctx, const ExperimentLog& log) {
  std::vector<CheckpointCell> cells;
  for (ExecMode mode : ctx.experiment.modes) {
    const double c = mode == ExecMode::kRealWorld ? ctx.experiment.ablation_c_dr
                                                  : ctx.experiment.suite_c_dr;
    for (const auto& song : ctx.experiment.songs) {
      for (int s = 0; s < ctx.experiment.seeds; ++s) {
        cells.push_back({song, mode, c, ctx.seed + static_cast<std::uint64_t>(s)});
      }
    }
  }
  return run_checkpoint_grid(ctx, "mode_ablation", cells, log);
}

ExperimentResult run_dr_sweep(const ExperimentContext& ctx, const ExperimentLog& log) {
  if (ctx.experiment.dr_song.empty()) throw ConfigError("dr sweep needs experiment.dr_song");
  const SongTimeline timeline = load_song(ctx.experiment.dr_song);
  const std::string label = song_label(ctx.experiment.dr_song);
  struct Cell {
    double c_dr;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double c : ctx.experiment.c_dr_grid) {
    for (int s = 0; s < ctx.experiment.dr_seeds; ++s) {
      cells.push_back({c, ctx.seed + static_cast<std::uint64_t>(s)});
    }
  }
  SafeLog safe(log);
  std::vector<std::vector<ResultRow>> out(cells.size());
  parallel_for(cells.size(), ctx.workers, [&](std::size_t i) {
    const Cell& cell = cells[i];
    const DRConfig dr = cell_dr(ctx, cell.c_dr, cell.seed);
    TrainerConfig tc = ctx.trainer;
    tc.seed = cell.seed;
    const std::string cfg_hash = hex64(config_hash(tc, dr));
    const std::string drh = dr_hash(dr);
    const TrainResult tr = train(timeline, dr, tc);
    if (!ctx.experiment.checkpoint_dir.empty()) {
      std::filesystem::create_directories(ctx.experiment.checkpoint_dir);
      save_checkpoint(tr.best, checkpoint_path(ctx.experiment.checkpoint_dir,
                                               ctx.experiment.dr_song, cell.c_dr, cell.seed));
    }
    if (tr.diverged) {
      for (const char* side : {"sim", "plant"}) {
        ResultRow r = make_row("dr_sweep", label, ctx.experiment.dr_mode, cell.c_dr, cell.seed, -1,
                               side, nan_scores(), ctx, cfg_hash, drh);
        r.status = "diverged";
        out[i].push_back(r);
      }
      safe("c_dr " + fixed2(cell.c_dr) + " diverged: " + tr.message);
      return;
    }
    const PolicyNet policy = tr.best.policy();
    const EpisodeSummary sim = evaluate_policy(policy, timeline, ctx.dr.nominal, ctx.trainer.env);
    out[i].push_back(make_row("dr_sweep", label, ExecMode::kJointMirroring, cell.c_dr, cell.seed, 0,
                              "sim", sim.scorer.scores(ctx.experiment.aggregation), ctx, cfg_hash,
                              drh));
    out[i].back().mode = "sim";
    auto plant_rows = evaluate_runs(ctx, "dr_sweep", label, timeline, policy,
                                    ctx.experiment.dr_mode, cell.c_dr, cell.seed,
                                    runs_for_c_dr(cell.c_dr), cfg_hash);
    for (auto& r : plant_rows) {
      if (r.side == "plant") out[i].push_back(r);
    }
    std::ostringstream msg;
    msg << "c_dr " << fixed2(cell.c_dr) << " seed " << cell.seed << " sim f1 "
        << out[i].front().scores.f1;
    safe(msg.str());
  });
  ExperimentResult result;
  for (auto& rows : out) result.rows.insert(result.rows.end(), rows.begin(), rows.end());
  result.summary = summarize(result.rows);
  return result;
}

void write_experiment_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir,
                              const std::string& name) {
  std::filesystem::create_directories(out_dir);
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(out_dir / (name + ".csv"));
    write_results_csv(f, result.rows);
  }
  {
    auto f = open(out_dir / (name + "_summary.csv"));
    write_summary_csv(f, result.summary);
  }
  std::string svg;
  const bool sweep = !result.summary.empty() && result.summary.front().experiment == "dr_sweep";
  if (sweep) {
    std::map<std::string, LineSeries> by_side;
    for (const auto& s : result.summary) {
      auto& line = by_side[s.side];
      line.name = s.side + " F1";
      line.x.push_back(s.c_dr);
      line.y.push_back(s.mean.f1);
      line.errors.push_back(s.stddev.f1);
    }
    std::vector<LineSeries> series;
    for (auto& [side, line] : by_side) series.push_back(line);
    svg = line_chart_svg("F1 over domain randomization intensity", "c_dr", "F1", series);
  } else {
    std::vector<std::string> series_names;
    std::vector<BarGroup> groups;
    std::map<std::string, std::size_t> series_index;
    std::map<std::string, std::size_t> group_index;
    for (const auto& s : result.summary) {
      const std::string key = s.mode + " " + s.side;
      if (series_index.emplace(key, series_names.size()).second) series_names.push_back(key);
      if (group_index.emplace(s.song, groups.size()).second) groups.push_back({s.song, {}, {}});
    }
    for (auto& g : groups) {
      g.values.assign(series_names.size(), std::numeric_limits<double>::quiet_NaN());
      g.errors.assign(series_names.size(), 0.0);
    }
    for (const auto& s : result.summary) {
      auto& g = groups[group_index[s.song]];
      const std::size_t k = series_index[s.mode + " " + s.side];
      g.values[k] = s.mean.f1;
      g.errors[k] = s.stddev.f1;
    }
    svg = bar_chart_svg("F1 per song", series_names, groups, "F1");
  }
  auto f = open(out_dir / (name + ".svg"));
  f << svg;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace pianorl

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

#include "pianorl/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pianorl/error.hpp"

namespace pianorl {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw ConfigError("config key " + key + ": '" + value + "' is not " + want);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::string spaced = s;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream is(spaced);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto t = trim(v);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) bad_value(key, v, "a number");
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto t = trim(v);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
    // Accept integral values written as 2e5.
    const double d = to_double(key, v);
    if (d != static_cast<double>(static_cast<std::int64_t>(d))) bad_value(key, v, "an integer");
    return static_cast<std::int64_t>(d);
  }
  return out;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  const std::int64_t i = to_int(key, v);
  if (i < 0) bad_value(key, v, "a non-negative integer");
  return static_cast<std::uint64_t>(i);
}

int to_positive(const std::string& key, const std::string& v) {
  const std::int64_t i = to_int(key, v);
  if (i <= 0 || i > 1'000'000'000) bad_value(key, v, "a positive integer");
  return static_cast<int>(i);
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& t : tokens(v)) out.push_back(to_double(key, t));
  return out;
}

std::vector<int> to_layers(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& t : tokens(v)) out.push_back(to_positive(key, t));
  if (out.empty()) bad_value(key, v, "a list of layer widths");
  return out;
}

JointVector to_joints(const std::string& key, const std::string& v) {
  const auto xs = to_doubles(key, v);
  JointVector out;
  if (xs.size() == 1) {
    out.fill(xs[0]);
  } else if (xs.size() == out.size()) {
    std::copy(xs.begin(), xs.end(), out.begin());
  } else {
    bad_value(key, v, "one or 13 numbers");
  }
  return out;
}

fs::path to_path(const std::string& v, const fs::path& base) {
  fs::path p(trim(v));
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <typename T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? " " : "") + f(xs[i]);
  return out;
}

std::string fmt_joints(const JointVector& v) {
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) return fmt(v[0]);
  return join<double>({v.begin(), v.end()}, fmt);
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value,
                                  const fs::path& base)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Entry {
  ConfigKey key;
  Setter set;
  Getter get;
};

#define PIANORL_NUM(name, field, help)                                                   \
  Entry {                                                                                \
    {name, help}, [](RunConfig& c, const std::string& k, const std::string& v,           \
                     const fs::path&) { c.field = to_double(k, v); },                    \
        [](const RunConfig& c) { return fmt(c.field); }                                  \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {{"run.seed", "seed for training, DR and evaluation streams"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.seed = to_count(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {{"run.workers", "parallel workers for experiment grids"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.workers = to_positive(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.workers); }},

      {{"physics.constants", "constants file with nominal physical parameters"},
       [](RunConfig& c, const std::string&, const std::string& v, const fs::path& base) {
         c.dr.nominal = load_constants(to_path(v, base));
       },
       [](const RunConfig&) { return std::string(); }},
      PIANORL_NUM("physics.piano_height", dr.nominal.piano_height, "key surface height, m"),
      {{"physics.joint_damping", "joint damping, one value or 13"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.dr.nominal.joint_damping = to_joints(k, v);
       },
       [](const RunConfig& c) { return fmt_joints(c.dr.nominal.joint_damping); }},
      {{"physics.joint_stiffness", "servo stiffness, one value or 13"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.dr.nominal.joint_stiffness = to_joints(k, v);
       },
       [](const RunConfig& c) { return fmt_joints(c.dr.nominal.joint_stiffness); }},
      PIANORL_NUM("physics.key_spring_stiffness", dr.nominal.key_spring_stiffness,
                  "key spring force at full depression, N"),
      PIANORL_NUM("physics.key_press_threshold", dr.nominal.key_press_threshold,
                  "depression counted as pressed, (0, 1)"),
      PIANORL_NUM("physics.finger_key_friction", dr.nominal.finger_key_friction,
                  "fingertip/key friction coefficient"),
      PIANORL_NUM("physics.hand_start_slider", dr.nominal.hand_start_slider,
                  "slider position at reset, m"),

      PIANORL_NUM("reward.c_energy", trainer.env.reward.c_energy, "energy penalty weight"),
      PIANORL_NUM("reward.tolerance_bound", trainer.env.reward.tolerance.bound,
                  "hand distance with full reward, m"),
      PIANORL_NUM("reward.tolerance_margin", trainer.env.reward.tolerance.margin,
                  "falloff distance beyond the bound, m"),
      PIANORL_NUM("reward.tolerance_value_at_margin", trainer.env.reward.tolerance.value_at_margin,
                  "reward at bound + margin"),
      {{"reward.binary_target_state", "use pressed flags instead of depression for targets"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.env.reward.binary_target_state = to_bool(k, v);
       },
       [](const RunConfig& c) {
         return std::string(c.trainer.env.reward.binary_target_state ? "true" : "false");
       }},

      PIANORL_NUM("dr.c_dr", dr.c_dr, "randomization intensity in [0, 1]"),
      PIANORL_NUM("dr.joint_damping", dr.spreads.joint_damping, "relative spread at c_dr = 1"),
      PIANORL_NUM("dr.joint_stiffness", dr.spreads.joint_stiffness, "relative spread at c_dr = 1"),
      PIANORL_NUM("dr.key_spring", dr.spreads.key_spring, "relative spread at c_dr = 1"),
      PIANORL_NUM("dr.press_threshold", dr.spreads.press_threshold, "absolute spread at c_dr = 1"),
      PIANORL_NUM("dr.friction", dr.spreads.friction, "relative spread at c_dr = 1"),
      PIANORL_NUM("dr.piano_height", dr.spreads.piano_height, "absolute spread at c_dr = 1, m"),
      PIANORL_NUM("dr.hand_start", dr.spreads.hand_start, "absolute spread at c_dr = 1, m"),

      {{"trainer.budget", "training budget"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.budget = to_count(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.trainer.budget); }},
      {{"trainer.budget_unit", "steps or episodes"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         const auto t = trim(v);
         if (t == "steps") c.trainer.budget_unit = BudgetUnit::kSteps;
         else if (t == "episodes") c.trainer.budget_unit = BudgetUnit::kEpisodes;
         else bad_value(k, v, "steps or episodes");
       },
       [](const RunConfig& c) {
         return std::string(c.trainer.budget_unit == BudgetUnit::kSteps ? "steps" : "episodes");
       }},
      {{"trainer.warmup", "random-action steps before learning"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.warmup = to_count(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.trainer.warmup); }},
      {{"trainer.utd_ratio", "critic updates per environment step"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.utd_ratio = to_positive(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.trainer.utd_ratio); }},
      {{"trainer.batch_size", "minibatch size"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.batch_size = to_positive(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.trainer.batch_size); }},
      {{"trainer.replay_capacity", "replay buffer capacity"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.replay_capacity = static_cast<std::size_t>(to_positive(k, v));
       },
       [](const RunConfig& c) { return std::to_string(c.trainer.replay_capacity); }},
      PIANORL_NUM("trainer.discount", trainer.discount, "discount factor"),
      PIANORL_NUM("trainer.target_smoothing", trainer.target_smoothing, "target network rate"),
      PIANORL_NUM("trainer.learning_rate", trainer.learning_rate, "Adam step size"),
      PIANORL_NUM("trainer.init_temperature", trainer.init_temperature, "initial entropy temperature"),
      {{"trainer.target_entropy", "entropy target; 'auto' is -13"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         if (trim(v) == "auto") c.trainer.target_entropy.reset();
         else c.trainer.target_entropy = to_double(k, v);
       },
       [](const RunConfig& c) {
         return c.trainer.target_entropy ? fmt(*c.trainer.target_entropy) : std::string("auto");
       }},
      {{"trainer.fixed_temperature", "keep the temperature at its initial value"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.fixed_temperature = to_bool(k, v);
       },
       [](const RunConfig& c) { return std::string(c.trainer.fixed_temperature ? "true" : "false"); }},
      {{"trainer.eval_interval", "steps between evaluations"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.eval_interval = static_cast<std::uint64_t>(to_positive(k, v));
       },
       [](const RunConfig& c) { return std::to_string(c.trainer.eval_interval); }},
      {{"trainer.eval_episodes", "episodes per evaluation"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.eval_episodes = to_positive(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.trainer.eval_episodes); }},
      {{"trainer.stop_at_eval_f1", "stop early at this evaluation F1; 'none' trains the full budget"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         if (trim(v) == "none") c.trainer.stop_at_eval_f1.reset();
         else c.trainer.stop_at_eval_f1 = to_double(k, v);
       },
       [](const RunConfig& c) {
         return c.trainer.stop_at_eval_f1 ? fmt(*c.trainer.stop_at_eval_f1) : std::string("none");
       }},
      {{"trainer.actor_hidden", "actor hidden layer widths"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.network.actor_hidden = to_layers(k, v);
       },
       [](const RunConfig& c) {
         return join<int>(c.trainer.network.actor_hidden, [](const int& x) { return std::to_string(x); });
       }},
      {{"trainer.critic_hidden", "critic hidden layer widths"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.network.critic_hidden = to_layers(k, v);
       },
       [](const RunConfig& c) {
         return join<int>(c.trainer.network.critic_hidden, [](const int& x) { return std::to_string(x); });
       }},
      PIANORL_NUM("trainer.dropout", trainer.network.dropout, "critic dropout rate"),
      {{"trainer.layer_norm", "layer normalization in critics"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.network.layer_norm = to_bool(k, v);
       },
       [](const RunConfig& c) { return std::string(c.trainer.network.layer_norm ? "true" : "false"); }},
      {{"trainer.num_critics", "size of the critic ensemble"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.trainer.network.num_critics = to_positive(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.trainer.network.num_critics); }},

      {{"modes.mode", "mirror, hybrid or real"},
       [](RunConfig& c, const std::string&, const std::string& v, const fs::path&) {
         try {
           c.modes.mode = parse_mode(trim(v));
         } catch (const UsageError& e) {
           throw ConfigError(e.what());
         }
       },
       [](const RunConfig& c) { return mode_name(c.modes.mode); }},
      {{"modes.plant", "internal or tcp:<host>:<port>"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         const auto t = trim(v);
         if (t != "internal" && t.rfind("tcp:", 0) != 0) bad_value(k, v, "internal or tcp:<host>:<port>");
         c.plant = t;
       },
       [](const RunConfig& c) { return c.plant; }},
      PIANORL_NUM("modes.plant_scale", experiment.plant_scale, "proxy plant perturbation scale"),
      {{"modes.plant_profile", "proxy or threshold"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         const auto t = trim(v);
         if (t == "proxy") c.experiment.plant_profile = PerturbationProfile::kProxy;
         else if (t == "threshold") c.experiment.plant_profile = PerturbationProfile::kThresholdOnly;
         else bad_value(k, v, "proxy or threshold");
       },
       [](const RunConfig& c) {
         return std::string(c.experiment.plant_profile == PerturbationProfile::kProxy ? "proxy" : "threshold");
       }},
      PIANORL_NUM("modes.plant_jitter", experiment.plant_jitter, "per-run plant variation (DR intensity)"),
      {{"modes.forward_positions", "send shadow joint positions instead of targets"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.modes.forward_positions = to_bool(k, v);
       },
       [](const RunConfig& c) { return std::string(c.modes.forward_positions ? "true" : "false"); }},
      {{"modes.deadline_ms", "bridge reply deadline per step"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.bridge.deadline = std::chrono::milliseconds(to_positive(k, v));
       },
       [](const RunConfig& c) { return std::to_string(c.bridge.deadline.count()); }},
      {{"modes.max_misses", "consecutive deadline misses before abort"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.bridge.max_consecutive_misses = to_positive(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.bridge.max_consecutive_misses); }},

      {{"experiment.songs", "song files for the suite and the ablation"},
       [](RunConfig& c, const std::string&, const std::string& v, const fs::path& base) {
         c.experiment.songs.clear();
         for (const auto& t : tokens(v)) c.experiment.songs.push_back(to_path(t, base));
       },
       [](const RunConfig& c) {
         return join<fs::path>(c.experiment.songs, [](const fs::path& p) { return p.string(); });
       }},
      {{"experiment.seeds", "trained seeds per song"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.experiment.seeds = to_positive(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.experiment.seeds); }},
      {{"experiment.runs", "plant runs per checkpoint"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.experiment.runs = to_positive(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.experiment.runs); }},
      {{"experiment.mode", "execution mode of the song suite"},
       [](RunConfig& c, const std::string&, const std::string& v, const fs::path&) {
         try {
           c.experiment.mode = parse_mode(trim(v));
         } catch (const UsageError& e) {
           throw ConfigError(e.what());
         }
       },
       [](const RunConfig& c) { return mode_name(c.experiment.mode); }},
      PIANORL_NUM("experiment.suite_c_dr", experiment.suite_c_dr, "DR intensity of suite checkpoints"),
      {{"experiment.modes", "modes compared in the ablation"},
       [](RunConfig& c, const std::string&, const std::string& v, const fs::path&) {
         c.experiment.modes.clear();
         try {
           for (const auto& t : tokens(v)) c.experiment.modes.push_back(parse_mode(t));
         } catch (const UsageError& e) {
           throw ConfigError(e.what());
         }
       },
       [](const RunConfig& c) { return join<ExecMode>(c.experiment.modes, mode_name); }},
      PIANORL_NUM("experiment.ablation_c_dr", experiment.ablation_c_dr,
                  "DR intensity of real-world ablation checkpoints"),
      {{"experiment.c_dr_grid", "DR intensities of the sweep"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.experiment.c_dr_grid = to_doubles(k, v);
       },
       [](const RunConfig& c) { return join<double>(c.experiment.c_dr_grid, fmt); }},
      {{"experiment.dr_song", "song trained in the DR sweep"},
       [](RunConfig& c, const std::string&, const std::string& v, const fs::path& base) {
         c.experiment.dr_song = to_path(v, base);
       },
       [](const RunConfig& c) { return c.experiment.dr_song.string(); }},
      {{"experiment.dr_seeds", "trainings per DR cell"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.experiment.dr_seeds = to_positive(k, v);
       },
       [](const RunConfig& c) { return std::to_string(c.experiment.dr_seeds); }},
      {{"experiment.dr_mode", "plant execution mode in the DR sweep"},
       [](RunConfig& c, const std::string&, const std::string& v, const fs::path&) {
         try {
           c.experiment.dr_mode = parse_mode(trim(v));
         } catch (const UsageError& e) {
           throw ConfigError(e.what());
         }
       },
       [](const RunConfig& c) { return mode_name(c.experiment.dr_mode); }},
      {{"experiment.aggregation", "micro or per_step"},
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         try {
           c.experiment.aggregation = parse_aggregation(trim(v));
         } catch (const Error&) {
           bad_value(k, v, "micro or per_step");
         }
       },
       [](const RunConfig& c) { return std::string(aggregation_name(c.experiment.aggregation)); }},
      {{"experiment.checkpoint_dir", "directory of trained checkpoints"},
       [](RunConfig& c, const std::string&, const std::string& v, const fs::path& base) {
         c.experiment.checkpoint_dir = to_path(v, base);
       },
       [](const RunConfig& c) { return c.experiment.checkpoint_dir.string(); }},
      {{"experiment.out_dir", "directory for CSV and SVG outputs"},
       [](RunConfig& c, const std::string&, const std::string& v, const fs::path& base) {
         c.experiment.out_dir = to_path(v, base);
       },
       [](const RunConfig& c) { return c.experiment.out_dir.string(); }},
  };
  return table;
}

#undef PIANORL_NUM

const Entry& find_entry(const std::string& key) {
  for (const auto& e : entries()) {
    if (e.key.name == key) return e;
  }
  throw ConfigError("unknown config key: " + key);
}

void finish(RunConfig& cfg) {
  validate(cfg.dr.nominal);
  cfg.modes.shadow_params = cfg.dr.nominal;
  if (!(cfg.dr.c_dr >= 0.0 && cfg.dr.c_dr <= 1.0)) throw ConfigError("dr.c_dr must lie in [0, 1]");
  for (double c : cfg.experiment.c_dr_grid) {
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("experiment.c_dr_grid values must lie in [0, 1]");
  }
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back(e.key);
    return out;
  }();
  return keys;
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value,
                    const fs::path& base_dir) {
  find_entry(key).set(cfg, key, value, base_dir);
}

Override parse_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("override must look like section.key=value: " + assignment);
  return {trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1))};
}

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir,
                           const std::vector<Override>& overrides) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  std::vector<Override> file_values;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key outside a section: " + section);
    for (const auto& [key, value] : body) {
      file_values.emplace_back(section + "." + key, value.get_value<std::string>());
    }
  }
  // The constants file seeds the physics section; explicit keys refine it.
  std::stable_partition(file_values.begin(), file_values.end(),
                        [](const Override& o) { return o.first == "physics.constants"; });
  RunConfig cfg;
  for (const auto& [k, v] : file_values) apply_override(cfg, k, v, base_dir);
  for (const auto& [k, v] : overrides) apply_override(cfg, k, v);
  finish(cfg);
  return cfg;
}

RunConfig load_run_config(const std::optional<fs::path>& path,
                          const std::vector<Override>& overrides) {
  if (!path) return parse_run_config("", {}, overrides);
  std::ifstream in(*path);
  if (!in) throw ConfigError("cannot open config file: " + path->string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path->parent_path(), overrides);
}

std::string render_run_config(const RunConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& e : entries()) {
    if (e.key.name == "physics.constants") continue;
    const auto dot = e.key.name.find('.');
    const std::string s = e.key.name.substr(0, dot);
    if (s != section) {
      os << (section.empty() ? "" : "\n") << "[" << s << "]\n";
      section = s;
    }
    os << e.key.name.substr(dot + 1) << " = " << e.get(cfg) << "\n";
  }
  return os.str();
}

TrainerConfig trainer_for(const RunConfig& cfg, std::uint64_t seed) {
  TrainerConfig t = cfg.trainer;
  t.seed = seed;
  return t;
}

DRConfig dr_for(const RunConfig& cfg, double c_dr, std::uint64_t seed) {
  DRConfig d = cfg.dr;
  d.c_dr = c_dr;
  d.seed = seed;
  return d;
}

ExperimentContext experiment_context(const RunConfig& cfg) {
  ExperimentContext ctx;
  ctx.experiment = cfg.experiment;
  ctx.trainer = cfg.trainer;
  ctx.dr = cfg.dr;
  ctx.modes = cfg.modes;
  ctx.seed = cfg.seed;
  ctx.workers = cfg.workers;
  return ctx;
}

}  // namespace pianorl

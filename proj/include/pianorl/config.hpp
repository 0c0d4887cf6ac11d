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

#ifndef PIANORL_CONFIG_HPP_
#define PIANORL_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pianorl/bridge.hpp"
#include "pianorl/experiments.hpp"

namespace pianorl {

// Everything a command needs, loaded from an INI-style file with
// [section] headers and `key = value` lines, then overridden by flags.
struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  DRConfig dr;  // dr.nominal holds the physics section
  TrainerConfig trainer;
  ModeConfig modes;
  // "internal" or "tcp:<host>:<port>".
  std::string plant = "internal";
  BridgeConfig bridge;
  ExperimentConfig experiment;
};

using Override = std::pair<std::string, std::string>;

struct ConfigKey {
  std::string name;  // section.key
  std::string help;
};

// All recognised keys, in file order.
const std::vector<ConfigKey>& config_keys();

// Unknown keys, bad values and invalid physics throw ConfigError. Relative
// paths inside a file resolve against the file's directory.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {},
                           const std::vector<Override>& overrides = {});
RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<Override>& overrides = {});
// Applies `section.key=value`.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value,
                    const std::filesystem::path& base_dir = {});
Override parse_override(const std::string& assignment);

std::string render_run_config(const RunConfig& cfg);

// Derived per-run settings: one seed feeds the trainer and the DR stream.
TrainerConfig trainer_for(const RunConfig& cfg, std::uint64_t seed);
DRConfig dr_for(const RunConfig& cfg, double c_dr, std::uint64_t seed);
ExperimentContext experiment_context(const RunConfig& cfg);

}  // namespace pianorl

#endif  // PIANORL_CONFIG_HPP_

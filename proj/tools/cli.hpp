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

#ifndef PIANORL_TOOLS_CLI_HPP_
#define PIANORL_TOOLS_CLI_HPP_

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace pianorl::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kConfig = 3,
  kPlant = 4,
  kNumerical = 5,
};

// Raw option values, filled by the parser.
struct Options {
  std::string config;
  std::vector<std::string> set;
  long long seed = -1;
  int workers = 0;
  bool quiet = false;
  bool print_config = false;

  std::string song;
  std::vector<std::string> songs;
  std::string ckpt;
  std::string out;
  std::string final_out;
  std::string curve;
  std::string log;
  std::string mode;
  std::string plant;
  std::string side = "plant";
  std::string aggregation;
  std::string in;
  std::string out_dir;
  std::string checkpoint_dir;
  std::vector<double> grid;
  double cdr = -1.0;
  double plant_scale = -1.0;
  long long steps = -1;
  int runs = 0;
  int seeds = 0;
  bool sim_only = false;
};

// The parser with every subcommand attached; option storage lives in `opts`.
std::unique_ptr<CLI::App> make_app(Options& opts);

// Runs one command line (args exclude the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pianorl::cli

#endif  // PIANORL_TOOLS_CLI_HPP_

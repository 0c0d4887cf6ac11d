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

#include "pianorl/metrics.hpp"

#include "pianorl/error.hpp"

namespace pianorl {

const char* aggregation_name(Aggregation a) {
  return a == Aggregation::kMicro ? "micro" : "per_step";
}

Aggregation parse_aggregation(const std::string& name) {
  if (name == "micro") return Aggregation::kMicro;
  if (name == "per_step") return Aggregation::kPerStep;
  throw ConfigError("unknown aggregation: " + name);
}

EpisodeCounts step_counts(const KeyVector& pressed, const KeyVector& targets) {
  EpisodeCounts c;
  for (std::size_t k = 0; k < pressed.size(); ++k) {
    if (pressed[k] && targets[k]) {
      ++c.tp;
    } else if (pressed[k]) {
      ++c.fp;
    } else if (targets[k]) {
      ++c.fn;
    }
  }
  return c;
}

EpisodeCounts accumulate(EpisodeCounts counts, const KeyVector& pressed,
                         const KeyVector& targets) {
  return counts += step_counts(pressed, targets);
}

double harmonic_f1(double precision, double recall) {
  if (precision <= 0.0 || recall <= 0.0) return 0.0;
  return 2.0 / (1.0 / recall + 1.0 / precision);
}

Scores finalize(const EpisodeCounts& c) {
  Scores s;
  s.precision = c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  s.recall = c.tp + c.fn == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  s.f1 = harmonic_f1(s.precision, s.recall);
  return s;
}

void EpisodeScorer::add(const KeyVector& pressed, const KeyVector& targets) {
  const EpisodeCounts c = step_counts(pressed, targets);
  counts_ += c;
  ++steps_;
  const Scores s = finalize(c);
  precision_sum_ += s.precision;
  recall_sum_ += s.recall;
  f1_sum_ += s.f1;
}

Scores EpisodeScorer::scores(Aggregation aggregation) const {
  if (aggregation == Aggregation::kMicro || steps_ == 0) return finalize(counts_);
  const double n = static_cast<double>(steps_);
  return {precision_sum_ / n, recall_sum_ / n, f1_sum_ / n};
}

}  // namespace pianorl

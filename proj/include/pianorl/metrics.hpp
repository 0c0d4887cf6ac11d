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

#ifndef PIANORL_METRICS_HPP_
#define PIANORL_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>

#include "pianorl/song.hpp"

namespace pianorl {

struct EpisodeCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  EpisodeCounts& operator+=(const EpisodeCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend EpisodeCounts operator+(EpisodeCounts a, const EpisodeCounts& b) { return a += b; }
  friend bool operator==(const EpisodeCounts&, const EpisodeCounts&) = default;
};

struct Scores {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
};

// Micro-averages over all timesteps of an episode; per-step averages
// precision/recall/F1 of each step instead.
enum class Aggregation { kMicro, kPerStep };

const char* aggregation_name(Aggregation a);
Aggregation parse_aggregation(const std::string& name);

EpisodeCounts step_counts(const KeyVector& pressed, const KeyVector& targets);
EpisodeCounts accumulate(EpisodeCounts counts, const KeyVector& pressed,
                         const KeyVector& targets);

// Zero denominators give 1; F1 is 0 when precision or recall is 0.
Scores finalize(const EpisodeCounts& counts);
double harmonic_f1(double precision, double recall);

// Streaming scorer for one episode supporting both aggregations.
class EpisodeScorer {
 public:
  void add(const KeyVector& pressed, const KeyVector& targets);
  const EpisodeCounts& counts() const { return counts_; }
  std::int64_t steps() const { return steps_; }
  Scores scores(Aggregation aggregation = Aggregation::kMicro) const;

 private:
  EpisodeCounts counts_;
  std::int64_t steps_ = 0;
  double precision_sum_ = 0.0;
  double recall_sum_ = 0.0;
  double f1_sum_ = 0.0;
};

}  // namespace pianorl

#endif  // PIANORL_METRICS_HPP_

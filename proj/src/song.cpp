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

#include "pianorl/song.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pianorl/error.hpp"

namespace pianorl {
namespace {

struct Interval {
  int key;
  double on;
  double off;
};

// Pairs on/off events per key. Events must alternate per key.
std::vector<Interval> to_intervals(std::span<const NoteEvent> events) {
  std::vector<NoteEvent> sorted(events.begin(), events.end());
  std::stable_sort(sorted.begin(), sorted.end(), canonical_less);
  std::array<double, kNumKeys> open_at{};
  std::array<bool, kNumKeys> open{};
  std::vector<Interval> out;
  for (const auto& e : sorted) {
    if (e.key_index < 0 || e.key_index >= kNumKeys) {
      throw UsageError("note event key index out of range: " +
                       std::to_string(e.key_index));
    }
    const auto k = static_cast<std::size_t>(e.key_index);
    if (e.on) {
      if (open[k]) throw UsageError("note-on while key already on");
      open[k] = true;
      open_at[k] = e.time;
    } else {
      if (!open[k]) throw UsageError("note-off without matching note-on");
      open[k] = false;
      out.push_back({e.key_index, open_at[k], e.time});
    }
  }
  for (std::size_t k = 0; k < open.size(); ++k) {
    if (open[k]) throw UsageError("unterminated note on key " + std::to_string(k));
  }
  std::sort(out.begin(), out.end(), [](const Interval& a, const Interval& b) {
    if (a.on != b.on) return a.on < b.on;
    return a.key < b.key;
  });
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

bool parse_double(std::string_view tok, double& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() &&
         std::isfinite(out);
}

}  // namespace

std::vector<int> key_indices(const KeyVector& keys) {
  std::vector<int> out;
  for (int k = 0; k < kNumKeys; ++k) {
    if (keys[static_cast<std::size_t>(k)]) out.push_back(k);
  }
  return out;
}

KeyVector keys_from_indices(std::span<const int> indices) {
  KeyVector keys{};
  for (int k : indices) {
    if (k < 0 || k >= kNumKeys) {
      throw UsageError("key index out of range: " + std::to_string(k));
    }
    keys[static_cast<std::size_t>(k)] = true;
  }
  return keys;
}

bool canonical_less(const NoteEvent& a, const NoteEvent& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.on != b.on) return !a.on;
  return a.key_index < b.key_index;
}

std::vector<NoteEvent> parse_song_text(std::string_view text) {
  std::vector<Interval> intervals;
  std::vector<int> line_of;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tokens.push_back(line.substr(i, j - i));
      i = j;
    }
    if (tokens.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    if (tokens.size() != 3) {
      throw SongFormatError("expected `key_index on_time off_time`", line_no);
    }
    int key = -1;
    auto [kp, kec] = std::from_chars(tokens[0].data(),
                                     tokens[0].data() + tokens[0].size(), key);
    if (kec != std::errc() || kp != tokens[0].data() + tokens[0].size() ||
        key < 0 || key >= kNumKeys) {
      throw SongFormatError("key index must be an integer in 0..48", line_no);
    }
    double on = 0.0;
    double off = 0.0;
    if (!parse_double(tokens[1], on) || !parse_double(tokens[2], off)) {
      throw SongFormatError("times must be finite numbers", line_no);
    }
    if (on < 0.0 || off <= on) {
      throw SongFormatError("need 0 <= on_time < off_time", line_no);
    }
    intervals.push_back({key, on, off});
    line_of.push_back(line_no);
    if (eol == text.size()) break;
  }

  // Same-key overlap check, reporting the later line.
  std::vector<std::size_t> order(intervals.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (intervals[a].key != intervals[b].key) return intervals[a].key < intervals[b].key;
    if (intervals[a].on != intervals[b].on) return intervals[a].on < intervals[b].on;
    return a < b;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& prev = intervals[order[i - 1]];
    const auto& cur = intervals[order[i]];
    if (prev.key == cur.key && cur.on < prev.off) {
      throw SongFormatError(
          "overlapping notes on key " + std::to_string(cur.key),
          std::max(line_of[order[i - 1]], line_of[order[i]]));
    }
  }

  std::vector<NoteEvent> events;
  events.reserve(intervals.size() * 2);
  for (const auto& iv : intervals) {
    events.push_back({iv.key, true, iv.on});
    events.push_back({iv.key, false, iv.off});
  }
  std::stable_sort(events.begin(), events.end(), canonical_less);
  return events;
}

std::string render_song_text(std::span<const NoteEvent> events) {
  std::string out;
  for (const auto& iv : to_intervals(events)) {
    out += std::to_string(iv.key);
    out += ' ';
    out += format_double(iv.on);
    out += ' ';
    out += format_double(iv.off);
    out += '\n';
  }
  return out;
}

SongTimeline discretize(std::span<const NoteEvent> events, double dt_control,
                        std::string name) {
  if (!(dt_control > 0.0)) throw UsageError("dt_control must be positive");
  const auto intervals = to_intervals(events);
  double last_off = 0.0;
  for (const auto& iv : intervals) last_off = std::max(last_off, iv.off);
  // The epsilon absorbs representation error in last_off / dt.
  const auto active_steps =
      static_cast<std::size_t>(std::max(0.0, std::ceil(last_off / dt_control - 1e-9)));
  SongTimeline timeline;
  timeline.dt_control = dt_control;
  timeline.name = std::move(name);
  timeline.steps.assign(active_steps + 1, KeyVector{});
  for (const auto& iv : intervals) {
    for (std::size_t t = 0; t < active_steps; ++t) {
      const double mid = (static_cast<double>(t) + 0.5) * dt_control;
      if (mid >= iv.on && mid < iv.off) {
        timeline.steps[t][static_cast<std::size_t>(iv.key)] = true;
      }
    }
  }
  return timeline;
}

std::vector<NoteEvent> timeline_events(const SongTimeline& timeline) {
  std::vector<NoteEvent> events;
  const double dt = timeline.dt_control;
  for (int k = 0; k < kNumKeys; ++k) {
    const auto key = static_cast<std::size_t>(k);
    bool on = false;
    std::size_t start = 0;
    for (std::size_t t = 0; t <= timeline.size(); ++t) {
      const bool active = t < timeline.size() && timeline.steps[t][key];
      if (active && !on) {
        on = true;
        start = t;
      } else if (!active && on) {
        on = false;
        events.push_back({k, true, static_cast<double>(start) * dt});
        events.push_back({k, false, static_cast<double>(t) * dt});
      }
    }
  }
  std::stable_sort(events.begin(), events.end(), canonical_less);
  return events;
}

std::vector<bool> lookahead(const SongTimeline& timeline, std::size_t t,
                            int horizon) {
  if (horizon < 1) throw UsageError("lookahead horizon must be >= 1");
  if (t >= timeline.size()) {
    throw UsageError("lookahead step " + std::to_string(t) + " out of range");
  }
  std::vector<bool> out(static_cast<std::size_t>(horizon) * kNumKeys, false);
  for (int r = 0; r < horizon; ++r) {
    const std::size_t src = t + 1 + static_cast<std::size_t>(r);
    if (src >= timeline.size()) break;
    for (std::size_t k = 0; k < kNumKeys; ++k) {
      out[static_cast<std::size_t>(r) * kNumKeys + k] = timeline.steps[src][k];
    }
  }
  return out;
}

std::vector<NoteEvent> load_song_events(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open song file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  const auto ext = path.extension().string();
  if (ext == ".mid" || ext == ".midi") {
    return parse_midi(bytes).events;
  }
  return parse_song_text(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

SongTimeline load_song(const std::filesystem::path& path, double dt_control) {
  const auto events = load_song_events(path);
  return discretize(events, dt_control, path.stem().string());
}

}  // namespace pianorl

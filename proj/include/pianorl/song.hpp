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

#ifndef PIANORL_SONG_HPP_
#define PIANORL_SONG_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pianorl {

inline constexpr int kNumKeys = 49;
// MIDI 36 (C2) is key index 0, MIDI 84 (C6) is key index 48.
inline constexpr int kLowestMidiNote = 36;
inline constexpr double kControlDt = 0.05;
inline constexpr int kLookaheadSteps = 5;

// One boolean per key. Used both for target sets and pressed-key states.
using KeyVector = std::array<bool, kNumKeys>;

std::vector<int> key_indices(const KeyVector& keys);
KeyVector keys_from_indices(std::span<const int> indices);

struct NoteEvent {
  int key_index = 0;
  bool on = false;
  double time = 0.0;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

// Canonical event order: time, then releases before presses, then key.
bool canonical_less(const NoteEvent& a, const NoteEvent& b);

struct SongTimeline {
  std::vector<KeyVector> steps;
  double dt_control = kControlDt;
  std::string name;

  std::size_t size() const { return steps.size(); }
  const KeyVector& at(std::size_t t) const { return steps.at(t); }
};

struct MidiParseResult {
  std::vector<NoteEvent> events;
  // Notes outside the 49-key window.
  int dropped_out_of_range = 0;
  // Note-ons still held at end of file; closed at the last event time.
  int unmatched_note_ons = 0;
};

// Standard MIDI File subset: format 0/1, note-on/off and tempo meta events,
// running status. Velocity is ignored. Throws ParseError with a byte offset.
MidiParseResult parse_midi(std::span<const std::uint8_t> bytes);

// Format 0, 480 ticks per quarter, 120 bpm. Times are rounded to ticks.
std::vector<std::uint8_t> write_midi(std::span<const NoteEvent> events);

// Text songs: one note per line, `key_index on_time off_time`. Blank lines
// and `#` comments are ignored. Throws SongFormatError on overlapping notes
// of the same key or malformed lines.
std::vector<NoteEvent> parse_song_text(std::string_view text);
std::string render_song_text(std::span<const NoteEvent> events);

// Step t targets key k iff the midpoint (t + 1/2) dt falls in one of k's
// [on, off) intervals. Length is ceil(last_off / dt) + 1 (terminal all-off).
SongTimeline discretize(std::span<const NoteEvent> events, double dt_control,
                        std::string name = {});

// Rebuilds step-aligned intervals from a timeline.
std::vector<NoteEvent> timeline_events(const SongTimeline& timeline);

// Targets for steps t+1 .. t+horizon, row-major (horizon x 49), false past
// the end. Throws UsageError if t is out of range or horizon < 1.
std::vector<bool> lookahead(const SongTimeline& timeline, std::size_t t,
                            int horizon = kLookaheadSteps);

// Reads `.mid`/`.midi` as MIDI and anything else as the text format.
std::vector<NoteEvent> load_song_events(const std::filesystem::path& path);
SongTimeline load_song(const std::filesystem::path& path,
                       double dt_control = kControlDt);

}  // namespace pianorl

#endif  // PIANORL_SONG_HPP_

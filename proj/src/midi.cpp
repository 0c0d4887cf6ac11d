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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pianorl/error.hpp"
#include "pianorl/song.hpp"

namespace pianorl {
namespace {

constexpr int kMaxTracks = 16;
constexpr std::uint32_t kDefaultTempo = 500000;  // microseconds per quarter

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  bool at_end(std::size_t limit) const { return pos_ >= limit; }

  void need(std::size_t n, std::size_t limit, const char* what) const {
    if (pos_ + n > limit) throw ParseError(std::string("truncated ") + what, pos_);
  }
  std::uint8_t u8(std::size_t limit) {
    need(1, limit, "data");
    return bytes_[pos_++];
  }
  std::uint16_t u16(std::size_t limit) {
    need(2, limit, "data");
    std::uint16_t v = static_cast<std::uint16_t>((bytes_[pos_] << 8) | bytes_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(std::size_t limit) {
    need(4, limit, "data");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }
  std::uint32_t vlq(std::size_t limit) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8(limit);
      v = (v << 7) | (b & 0x7F);
      if ((b & 0x80) == 0) return v;
    }
    throw ParseError("variable-length quantity longer than 4 bytes", pos_);
  }
  bool tag(const char* four) {
    if (pos_ + 4 > bytes_.size()) return false;
    for (int i = 0; i < 4; ++i) {
      if (bytes_[pos_ + static_cast<std::size_t>(i)] != static_cast<std::uint8_t>(four[i])) {
        return false;
      }
    }
    return true;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct RawNote {
  std::uint64_t tick;
  std::size_t order;
  int midi_note;
  bool on;
};

struct TempoChange {
  std::uint64_t tick;
  std::size_t order;
  std::uint32_t usec_per_quarter;
};

class TempoMap {
 public:
  TempoMap(std::vector<TempoChange> changes, std::uint16_t division)
      : division_(division) {
    std::stable_sort(changes.begin(), changes.end(),
                     [](const TempoChange& a, const TempoChange& b) {
                       if (a.tick != b.tick) return a.tick < b.tick;
                       return a.order < b.order;
                     });
    segments_.push_back({0, 0.0, kDefaultTempo});
    for (const auto& c : changes) {
      auto& last = segments_.back();
      if (c.tick == last.tick) {
        last.usec_per_quarter = c.usec_per_quarter;
        continue;
      }
      segments_.push_back({c.tick, seconds(c.tick), c.usec_per_quarter});
    }
  }

  double seconds(std::uint64_t tick) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), tick,
                               [](std::uint64_t t, const Segment& s) { return t < s.tick; });
    const Segment& s = *(it - 1);
    // Integer product first so single-tempo files convert exactly.
    const double num = static_cast<double>((tick - s.tick) * s.usec_per_quarter);
    return s.start_seconds + num / (static_cast<double>(division_) * 1e6);
  }

 private:
  struct Segment {
    std::uint64_t tick;
    double start_seconds;
    std::uint32_t usec_per_quarter;
  };
  std::uint16_t division_;
  std::vector<Segment> segments_;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::array<std::uint8_t, 5> buf{};
  int n = 0;
  buf[static_cast<std::size_t>(n++)] = v & 0x7F;
  while ((v >>= 7) != 0) buf[static_cast<std::size_t>(n++)] = 0x80 | (v & 0x7F);
  while (n > 0) out.push_back(buf[static_cast<std::size_t>(--n)]);
}

}  // namespace

MidiParseResult parse_midi(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const std::size_t end = bytes.size();
  if (!r.tag("MThd")) throw ParseError("missing MThd header", 0);
  r.seek(4);
  const std::uint32_t header_len = r.u32(end);
  if (header_len < 6) throw ParseError("MThd length < 6", 4);
  const std::size_t header_start = r.pos();
  const std::uint16_t format = r.u16(end);
  const std::uint16_t ntracks = r.u16(end);
  const std::uint16_t division = r.u16(end);
  if (format > 1) throw ParseError("unsupported SMF format " + std::to_string(format), header_start);
  if (ntracks > kMaxTracks) throw ParseError("more than 16 tracks", header_start + 2);
  if (division & 0x8000) throw ParseError("SMPTE time division not supported", header_start + 4);
  if (division == 0) throw ParseError("zero ticks per quarter", header_start + 4);
  r.need(header_len - 6, end, "header");
  r.seek(header_start + header_len);

  std::vector<RawNote> notes;
  std::vector<TempoChange> tempos;
  std::uint64_t last_tick = 0;
  std::size_t order = 0;
  int tracks_seen = 0;

  while (tracks_seen < ntracks) {
    if (r.pos() + 8 > end) throw ParseError("missing track chunk", r.pos());
    const bool is_track = r.tag("MTrk");
    const std::size_t chunk_pos = r.pos();
    r.seek(chunk_pos + 4);
    const std::uint32_t len = r.u32(end);
    const std::size_t limit = r.pos() + len;
    if (limit > end) throw ParseError("chunk extends past end of file", chunk_pos);
    if (!is_track) {
      r.seek(limit);
      continue;
    }
    ++tracks_seen;
    std::uint64_t tick = 0;
    std::uint8_t running = 0;
    bool ended = false;
    while (!r.at_end(limit) && !ended) {
      tick += r.vlq(limit);
      last_tick = std::max(last_tick, tick);
      const std::size_t ev_pos = r.pos();
      std::uint8_t status = r.u8(limit);
      if (status == 0xFF) {
        const std::uint8_t type = r.u8(limit);
        const std::uint32_t mlen = r.vlq(limit);
        r.need(mlen, limit, "meta event");
        const std::size_t data = r.pos();
        if (type == 0x51) {
          if (mlen != 3) throw ParseError("tempo meta event must have length 3", ev_pos);
          std::uint32_t t = 0;
          for (int i = 0; i < 3; ++i) t = (t << 8) | bytes[data + static_cast<std::size_t>(i)];
          if (t == 0) throw ParseError("zero tempo", ev_pos);
          tempos.push_back({tick, order++, t});
        } else if (type == 0x2F) {
          ended = true;
        }
        r.seek(data + mlen);
        running = 0;
        continue;
      }
      if (status == 0xF0 || status == 0xF7) {
        const std::uint32_t slen = r.vlq(limit);
        r.need(slen, limit, "sysex event");
        r.seek(r.pos() + slen);
        running = 0;
        continue;
      }
      std::uint8_t first_data = 0;
      if (status < 0x80) {
        if (running == 0) throw ParseError("data byte without running status", ev_pos);
        first_data = status;
        status = running;
      } else {
        if (status >= 0xF0) throw ParseError("unsupported system message", ev_pos);
        running = status;
        first_data = r.u8(limit);
      }
      const std::uint8_t kind = status & 0xF0;
      const bool two_bytes = kind != 0xC0 && kind != 0xD0;
      const std::uint8_t second_data = two_bytes ? r.u8(limit) : 0;
      if ((first_data | second_data) & 0x80) {
        throw ParseError("data byte with high bit set", ev_pos);
      }
      if (kind == 0x90 || kind == 0x80) {
        const bool on = kind == 0x90 && second_data > 0;
        notes.push_back({tick, order++, first_data, on});
      }
    }
    if (!ended) throw ParseError("track without end-of-track event", limit);
    r.seek(limit);
  }

  const TempoMap tempo_map(std::move(tempos), division);
  std::stable_sort(notes.begin(), notes.end(), [](const RawNote& a, const RawNote& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    return a.order < b.order;
  });

  MidiParseResult result;
  std::array<bool, kNumKeys> open{};
  std::array<double, kNumKeys> open_at{};
  auto close = [&](std::size_t k, double t) {
    open[k] = false;
    // Zero-length notes cannot be discretized; drop them.
    if (t > open_at[k]) {
      result.events.push_back({static_cast<int>(k), true, open_at[k]});
      result.events.push_back({static_cast<int>(k), false, t});
    }
  };
  for (const auto& n : notes) {
    const int key = n.midi_note - kLowestMidiNote;
    if (key < 0 || key >= kNumKeys) {
      if (n.on) ++result.dropped_out_of_range;
      continue;
    }
    const auto k = static_cast<std::size_t>(key);
    const double t = tempo_map.seconds(n.tick);
    if (n.on && !open[k]) {
      open[k] = true;
      open_at[k] = t;
    } else if (!n.on && open[k]) {
      close(k, t);
    }
  }
  const double end_time = tempo_map.seconds(last_tick);
  for (std::size_t k = 0; k < open.size(); ++k) {
    if (open[k]) {
      ++result.unmatched_note_ons;
      close(k, end_time);
    }
  }
  std::stable_sort(result.events.begin(), result.events.end(), canonical_less);
  return result;
}

std::vector<std::uint8_t> write_midi(std::span<const NoteEvent> events) {
  constexpr std::uint16_t kDivision = 480;
  constexpr double kTicksPerSecond = 960.0;  // 480 ticks at 120 bpm

  struct TickEvent {
    std::uint64_t tick;
    bool on;
    int key;
  };
  std::vector<TickEvent> ticks;
  for (const auto& e : events) {
    if (e.key_index < 0 || e.key_index >= kNumKeys || e.time < 0.0) {
      throw UsageError("cannot encode note event outside the key window");
    }
    ticks.push_back({static_cast<std::uint64_t>(std::llround(e.time * kTicksPerSecond)),
                     e.on, e.key_index});
  }
  std::stable_sort(ticks.begin(), ticks.end(), [](const TickEvent& a, const TickEvent& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    if (a.on != b.on) return !a.on;
    return a.key < b.key;
  });

  std::vector<std::uint8_t> track;
  // Tempo 500000 us per quarter.
  track.insert(track.end(), {0x00, 0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20});
  std::uint64_t prev = 0;
  for (const auto& t : ticks) {
    put_vlq(track, static_cast<std::uint32_t>(t.tick - prev));
    prev = t.tick;
    track.push_back(t.on ? 0x90 : 0x80);
    track.push_back(static_cast<std::uint8_t>(t.key + kLowestMidiNote));
    track.push_back(t.on ? 64 : 0);
  }
  track.insert(track.end(), {0x00, 0xFF, 0x2F, 0x00});

  std::vector<std::uint8_t> out = {'M', 'T', 'h', 'd'};
  put_u32(out, 6);
  out.insert(out.end(), {0x00, 0x00, 0x00, 0x01, kDivision >> 8, kDivision & 0xFF});
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  put_u32(out, static_cast<std::uint32_t>(track.size()));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

}  // namespace pianorl

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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "pianorl/error.hpp"
#include "pianorl/policy.hpp"

// Checkpoint layout (little endian):
//   "PIANOCKP" | u32 version | u64 train_steps | u64 config_hash |
//   f64 log_alpha | actor spec | critic spec | actor params |
//   u32 n + n critic param arrays | u32 n + n target param arrays | u32 crc32
// A spec is i32 input, i32 output, u32 n, n x i32 hidden, f64 dropout,
// u8 layer_norm. A param array is u64 length followed by f32 values.

namespace pianorl {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'P', 'I', 'A', 'N', 'O', 'C', 'K', 'P'};

class Writer {
 public:
  template <typename T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes.insert(bytes.end(), p, p + sizeof(T));
  }
  void put_floats(const std::vector<float>& v) {
    put<std::uint64_t>(v.size());
    const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
    bytes.insert(bytes.end(), p, p + v.size() * sizeof(float));
  }
  void put_spec(const nn::MlpSpec& s) {
    put<std::int32_t>(s.input);
    put<std::int32_t>(s.output);
    put<std::uint32_t>(static_cast<std::uint32_t>(s.hidden.size()));
    for (int h : s.hidden) put<std::int32_t>(h);
    put<double>(s.dropout);
    put<std::uint8_t>(s.layer_norm ? 1 : 0);
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> b, std::size_t limit) : bytes_(b), limit_(limit) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > limit_) throw ChecksumError("checkpoint payload truncated");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::vector<float> get_floats() {
    const auto n = get<std::uint64_t>();
    if (n > (limit_ - pos_) / sizeof(float)) throw ChecksumError("checkpoint array overruns file");
    std::vector<float> v(n);
    std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
    return v;
  }
  nn::MlpSpec get_spec() {
    nn::MlpSpec s;
    s.input = get<std::int32_t>();
    s.output = get<std::int32_t>();
    const auto n = get<std::uint32_t>();
    if (n > 64) throw ChecksumError("implausible hidden layer count");
    for (std::uint32_t i = 0; i < n; ++i) s.hidden.push_back(get<std::int32_t>());
    s.dropout = get<double>();
    s.layer_norm = get<std::uint8_t>() != 0;
    if (s.input <= 0 || s.output <= 0) throw ChecksumError("invalid network shape");
    for (int h : s.hidden) {
      if (h <= 0) throw ChecksumError("invalid network shape");
    }
    return s;
  }
  void seek(std::size_t p) { pos_ = p; }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = crc32(crc, bytes.data() + off, n);
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes.insert(w.bytes.end(), std::begin(kMagic), std::end(kMagic));
  w.put<std::uint32_t>(ckpt.version);
  w.put<std::uint64_t>(ckpt.train_steps);
  w.put<std::uint64_t>(ckpt.config_hash);
  w.put<double>(ckpt.log_alpha);
  w.put_spec(ckpt.actor);
  w.put_spec(ckpt.critic);
  w.put_floats(ckpt.actor_params);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.critic_params.size()));
  for (const auto& p : ckpt.critic_params) w.put_floats(p);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.target_params.size()));
  for (const auto& p : ckpt.target_params) w.put_floats(p);
  w.put<std::uint32_t>(crc_of(w.bytes));
  return std::move(w.bytes);
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = sizeof(kMagic) + sizeof(std::uint32_t);
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ChecksumError("not a checkpoint file (bad magic)");
  }
  if (bytes.size() < kHeader + sizeof(std::uint32_t)) {
    throw ChecksumError("checkpoint truncated");
  }
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + sizeof(kMagic), sizeof(version));
  if (version != Checkpoint::kVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) +
                       " is not supported by this build (expected " +
                       std::to_string(Checkpoint::kVersion) + ")");
  }
  const std::size_t body = bytes.size() - sizeof(std::uint32_t);
  std::uint32_t stored = 0;
  std::memcpy(&stored, bytes.data() + body, sizeof(stored));
  if (crc_of(bytes.first(body)) != stored) throw ChecksumError("checkpoint checksum mismatch");

  Reader r(bytes, body);
  r.seek(kHeader);
  Checkpoint c;
  c.version = version;
  c.train_steps = r.get<std::uint64_t>();
  c.config_hash = r.get<std::uint64_t>();
  c.log_alpha = r.get<double>();
  c.actor = r.get_spec();
  c.critic = r.get_spec();
  c.actor_params = r.get_floats();
  const auto n_critics = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_critics; ++i) c.critic_params.push_back(r.get_floats());
  const auto n_targets = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_targets; ++i) c.target_params.push_back(r.get_floats());
  if (r.pos() != body) throw ChecksumError("trailing bytes in checkpoint");
  if (c.actor_params.size() != nn::parameter_count(c.actor)) {
    throw ChecksumError("actor parameter count does not match its shape");
  }
  for (const auto& p : c.critic_params) {
    if (p.size() != nn::parameter_count(c.critic)) throw ChecksumError("critic size mismatch");
  }
  for (const auto& p : c.target_params) {
    if (p.size() != nn::parameter_count(c.critic)) throw ChecksumError("target size mismatch");
  }
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("short write to checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace pianorl

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

#include "pianorl/bridge.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include <json.hpp>

#include "pianorl/error.hpp"

namespace pianorl {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

[[noreturn]] void bad_line(const std::string& line, const std::string& why) {
  throw ProtocolError("malformed bridge line (" + why + "): " + line);
}

json parse_object(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error&) {
    bad_line(line, "not JSON");
  }
  if (!j.is_object()) bad_line(line, "not an object");
  if (!j.contains("t") || !j["t"].is_number_unsigned()) bad_line(line, "t must be a non-negative integer");
  return j;
}

JointVector joint_array(const json& v, const std::string& line, const char* field) {
  if (!v.is_array() || v.size() != kNumJoints) {
    bad_line(line, std::string(field) + " must hold 13 numbers");
  }
  JointVector out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!v[i].is_number()) bad_line(line, std::string(field) + " must hold 13 numbers");
    out[i] = v[i].get<double>();
    if (!std::isfinite(out[i])) bad_line(line, std::string(field) + " is not finite");
  }
  return out;
}

}  // namespace

std::string encode(const HostMessage& m) {
  json j;
  j["t"] = m.t;
  if (m.cmd) j["cmd"] = *m.cmd;
  if (m.reset) j["reset"] = *m.reset;
  return j.dump();
}

std::string encode(const DeviceMessage& m) {
  json j;
  j["t"] = m.t;
  j["keys"] = m.keys;
  if (m.joints) j["joints"] = *m.joints;
  return j.dump();
}

HostMessage decode_host(const std::string& line) {
  const json j = parse_object(line);
  HostMessage m;
  m.t = j["t"].get<std::uint64_t>();
  const bool has_cmd = j.contains("cmd");
  const bool has_reset = j.contains("reset");
  if (has_cmd == has_reset) bad_line(line, "need exactly one of cmd and reset");
  if (has_cmd) m.cmd = joint_array(j["cmd"], line, "cmd");
  if (has_reset) {
    if (!j["reset"].is_number_unsigned()) bad_line(line, "reset must be a seed");
    m.reset = j["reset"].get<std::uint64_t>();
  }
  return m;
}

DeviceMessage decode_device(const std::string& line) {
  const json j = parse_object(line);
  DeviceMessage m;
  m.t = j["t"].get<std::uint64_t>();
  if (!j.contains("keys") || !j["keys"].is_array()) bad_line(line, "keys must be an array");
  KeyVector seen{};
  for (const auto& k : j["keys"]) {
    if (!k.is_number_integer()) bad_line(line, "key index is not an integer");
    const int idx = k.get<int>();
    if (idx < 0 || idx >= kNumKeys) bad_line(line, "key index out of range");
    if (seen[static_cast<std::size_t>(idx)]) bad_line(line, "duplicate key index");
    seen[static_cast<std::size_t>(idx)] = true;
    m.keys.push_back(idx);
  }
  if (j.contains("joints")) m.joints = joint_array(j["joints"], line, "joints");
  return m;
}

DeviceServer::DeviceServer(Plant& plant) : plant_(plant) {}

DeviceMessage DeviceServer::to_message(const PlantReading& r) {
  return {r.t, key_indices(r.pressed), r.joints};
}

std::string DeviceServer::greeting() {
  last_ = plant_.reset(0);
  return encode(to_message(last_));
}

std::string DeviceServer::handle(const std::string& line) {
  const HostMessage m = decode_host(line);
  if (m.reset) {
    last_ = plant_.reset(*m.reset);
  } else {
    last_ = plant_.command(m.t, *m.cmd);
  }
  return encode(to_message(last_));
}

LoopbackTransport::LoopbackTransport(DeviceServer& device) : device_(device) {
  inbox_.push_back(device_.greeting());
}

void LoopbackTransport::send_line(const std::string& line) {
  std::string reply = device_.handle(line);
  if (drop_ && drop_(replies_++)) return;
  inbox_.push_back(std::move(reply));
}

std::optional<std::string> LoopbackTransport::recv_line(std::chrono::milliseconds) {
  if (inbox_.empty()) return std::nullopt;
  std::string line = std::move(inbox_.front());
  inbox_.pop_front();
  return line;
}

FdTransport::FdTransport(int read_fd, int write_fd, bool owns)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns) {}

FdTransport::~FdTransport() {
  if (!owns_) return;
  ::close(read_fd_);
  if (write_fd_ != read_fd_) ::close(write_fd_);
}

std::unique_ptr<FdTransport> FdTransport::connect_tcp(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0) {
    throw PlantError("cannot resolve " + host);
  }
  int fd = -1;
  for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw PlantError("cannot connect to " + host + ":" + service);
  return std::make_unique<FdTransport>(fd, fd, true);
}

void FdTransport::send_line(const std::string& line) {
  const std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw PlantError(std::string("bridge write failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> FdTransport::take_line() {
  const auto pos = buffer_.find('\n');
  if (pos == std::string::npos) return std::nullopt;
  std::string line = buffer_.substr(0, pos);
  buffer_.erase(0, pos + 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::optional<std::string> FdTransport::recv_line(std::chrono::milliseconds deadline) {
  const auto end = Clock::now() + deadline;
  for (;;) {
    if (auto line = take_line()) return line;
    if (eof_) return std::nullopt;
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(end - Clock::now()).count();
    if (left < 0) return std::nullopt;
    pollfd p{read_fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw PlantError(std::string("bridge poll failed: ") + std::strerror(errno));
    }
    if (rc == 0) return std::nullopt;
    char chunk[4096];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw PlantError(std::string("bridge read failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      eof_ = true;
      continue;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::optional<std::string> FdTransport::recv_line_blocking() {
  for (;;) {
    if (auto line = take_line()) return line;
    if (eof_) return std::nullopt;
    if (auto line = recv_line(std::chrono::milliseconds(1000))) return line;
  }
}

void serve_device(FdTransport& transport, DeviceServer& device) {
  transport.send_line(device.greeting());
  while (auto line = transport.recv_line_blocking()) {
    transport.send_line(device.handle(*line));
  }
}

BridgePlant::BridgePlant(Transport& transport, BridgeConfig config)
    : transport_(transport), config_(config) {
  const auto hello = await(0, config_.connect_timeout);
  if (!hello) throw ProtocolError("bridge: no greeting from device");
  last_ = to_reading(*hello);
}

PlantReading BridgePlant::to_reading(const DeviceMessage& m) {
  PlantReading r;
  r.t = m.t;
  r.pressed = keys_from_indices(m.keys);
  r.joints = m.joints;
  return r;
}

std::optional<DeviceMessage> BridgePlant::await(std::uint64_t t,
                                                std::chrono::milliseconds deadline) {
  const auto end = Clock::now() + deadline;
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(end - Clock::now());
    auto line = transport_.recv_line(std::max(left, std::chrono::milliseconds(0)));
    if (!line) return std::nullopt;
    DeviceMessage m = decode_device(*line);
    if (m.t == t) return m;
    if (m.t > t) {
      throw ProtocolError("bridge: reply for t=" + std::to_string(m.t) + " while waiting for t=" +
                          std::to_string(t) + ": " + *line);
    }
    events_.push_back("late reply t=" + std::to_string(m.t) + " discarded");
  }
}

PlantReading BridgePlant::reset(std::uint64_t seed) {
  HostMessage m;
  m.reset = seed;
  transport_.send_line(encode(m));
  const auto reply = await(0, config_.connect_timeout);
  if (!reply) throw ProtocolError("bridge: device did not answer reset");
  consecutive_misses_ = 0;
  last_ = to_reading(*reply);
  return last_;
}

PlantReading BridgePlant::command(std::uint64_t t, const JointVector& targets) {
  HostMessage m;
  m.t = t;
  m.cmd = targets;
  transport_.send_line(encode(m));
  const auto reply = await(t + 1, config_.deadline);
  if (reply) {
    consecutive_misses_ = 0;
    last_ = to_reading(*reply);
    return last_;
  }
  ++misses_total_;
  ++consecutive_misses_;
  events_.push_back("deadline missed at t=" + std::to_string(t));
  if (consecutive_misses_ >= config_.max_consecutive_misses) {
    throw ProtocolError("bridge: " + std::to_string(consecutive_misses_) +
                        " consecutive deadline misses at t=" + std::to_string(t));
  }
  PlantReading stale = last_;
  stale.t = t + 1;
  stale.stale = true;
  return stale;
}

}  // namespace pianorl

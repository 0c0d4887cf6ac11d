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

#ifndef PIANORL_BRIDGE_HPP_
#define PIANORL_BRIDGE_HPP_

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pianorl/plant.hpp"

namespace pianorl {

// Line-delimited JSON, one object per line.
//   host -> device  {"t": n, "cmd": [13 floats]}   or   {"t": 0, "reset": seed}
//   device -> host  {"t": n, "keys": [indices], "joints": [13 floats]}
// The device greets with its t = 0 state on connect, answers a reset with a
// t = 0 state and answers command t with the state at t + 1.
struct HostMessage {
  std::uint64_t t = 0;
  std::optional<JointVector> cmd;
  std::optional<std::uint64_t> reset;
};

struct DeviceMessage {
  std::uint64_t t = 0;
  std::vector<int> keys;
  std::optional<JointVector> joints;
};

std::string encode(const HostMessage& m);
std::string encode(const DeviceMessage& m);
// Throw ProtocolError quoting the offending line.
HostMessage decode_host(const std::string& line);
DeviceMessage decode_device(const std::string& line);

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send_line(const std::string& line) = 0;
  // Next complete line, or nullopt if none arrived before the deadline.
  virtual std::optional<std::string> recv_line(std::chrono::milliseconds deadline) = 0;
};

// Device side: wraps any plant and speaks the protocol.
class DeviceServer {
 public:
  explicit DeviceServer(Plant& plant);
  std::string greeting();
  // One reply per request line. Malformed lines throw ProtocolError.
  std::string handle(const std::string& line);

 private:
  static DeviceMessage to_message(const PlantReading& r);
  Plant& plant_;
  PlantReading last_;
};

// In-process transport: every line sent is answered synchronously by the
// device server. `drop` lets tests lose selected replies (by reply index).
class LoopbackTransport final : public Transport {
 public:
  explicit LoopbackTransport(DeviceServer& device);
  void send_line(const std::string& line) override;
  std::optional<std::string> recv_line(std::chrono::milliseconds deadline) override;
  void set_drop(std::function<bool(std::uint64_t)> drop) { drop_ = std::move(drop); }
  // Raw line injection, as if the device had sent it.
  void inject(std::string line) { inbox_.push_back(std::move(line)); }

 private:
  DeviceServer& device_;
  std::deque<std::string> inbox_;
  std::function<bool(std::uint64_t)> drop_;
  std::uint64_t replies_ = 0;
};

// Byte-stream transport over file descriptors (socket, pipe or TCP).
class FdTransport final : public Transport {
 public:
  FdTransport(int read_fd, int write_fd, bool owns = false);
  ~FdTransport() override;
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  // Throws PlantError when the connection cannot be made.
  static std::unique_ptr<FdTransport> connect_tcp(const std::string& host, int port);

  void send_line(const std::string& line) override;
  std::optional<std::string> recv_line(std::chrono::milliseconds deadline) override;
  // Blocks until a line or end of stream.
  std::optional<std::string> recv_line_blocking();

 private:
  std::optional<std::string> take_line();
  int read_fd_;
  int write_fd_;
  bool owns_;
  bool eof_ = false;
  std::string buffer_;
};

// Answers requests on `transport` until end of stream.
void serve_device(FdTransport& transport, DeviceServer& device);

struct BridgeConfig {
  std::chrono::milliseconds deadline{25};
  std::chrono::milliseconds connect_timeout{2000};
  int max_consecutive_misses = 3;
};

// Host side of the protocol, exposed as a plant.
class BridgePlant final : public Plant {
 public:
  // Waits for the device greeting.
  BridgePlant(Transport& transport, BridgeConfig config = {});

  PlantReading reset(std::uint64_t seed) override;
  PlantReading command(std::uint64_t t, const JointVector& targets) override;
  std::string describe() const override { return "bridge"; }

  // Missed deadlines and discarded late replies, one entry each.
  const std::vector<std::string>& events() const { return events_; }
  std::uint64_t deadline_misses() const { return misses_total_; }

 private:
  std::optional<DeviceMessage> await(std::uint64_t t, std::chrono::milliseconds deadline);
  static PlantReading to_reading(const DeviceMessage& m);

  Transport& transport_;
  BridgeConfig config_;
  PlantReading last_;
  int consecutive_misses_ = 0;
  std::uint64_t misses_total_ = 0;
  std::vector<std::string> events_;
};

}  // namespace pianorl

#endif  // PIANORL_BRIDGE_HPP_

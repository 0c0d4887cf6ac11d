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

#include <gtest/gtest.h>

#include <sys/socket.h>

#include <thread>

#include "pianorl/bridge.hpp"
#include "pianorl/error.hpp"
#include "pianorl/exec_modes.hpp"
#include "support.hpp"

namespace pianorl {
namespace {

using testing::kSongDir;

TEST(Protocol, EncodeDecodeRoundTrip) {
  HostMessage h;
  h.t = 17;
  JointVector cmd;
  for (std::size_t i = 0; i < cmd.size(); ++i) cmd[i] = 0.1 * static_cast<double>(i) - 0.3;
  h.cmd = cmd;
  const auto back = decode_host(encode(h));
  EXPECT_EQ(back.t, 17u);
  ASSERT_TRUE(back.cmd);
  EXPECT_EQ(*back.cmd, cmd);
  HostMessage r;
  r.reset = 5;
  EXPECT_EQ(decode_host(encode(r)).reset, std::optional<std::uint64_t>(5));
  DeviceMessage d{18, {3, 24, 48}, cmd};
  const auto dd = decode_device(encode(d));
  EXPECT_EQ(dd.t, 18u);
  EXPECT_EQ(dd.keys, (std::vector<int>{3, 24, 48}));
  EXPECT_EQ(dd.joints, d.joints);
  DeviceMessage nojoints{2, {}, std::nullopt};
  EXPECT_FALSE(decode_device(encode(nojoints)).joints.has_value());
}

TEST(Protocol, MalformedLinesQuoteContent) {
  const std::string bad = "{\"t\": 3, \"keys\": [1, 2";
  try {
    decode_device(bad);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_NE(std::string(e.what()).find(bad), std::string::npos);
  }
  EXPECT_THROW(decode_device("[1,2]"), ProtocolError);
  EXPECT_THROW(decode_device("{\"t\": -1, \"keys\": []}"), ProtocolError);
  EXPECT_THROW(decode_device("{\"t\": 1, \"keys\": [49]}"), ProtocolError);
  EXPECT_THROW(decode_device("{\"t\": 1, \"keys\": [4, 4]}"), ProtocolError);
  EXPECT_THROW(decode_device("{\"t\": 1, \"keys\": [], \"joints\": [1, 2]}"), ProtocolError);
  EXPECT_THROW(decode_host("{\"t\": 1}"), ProtocolError);
  EXPECT_THROW(decode_host("{\"t\": 1, \"cmd\": [1,2,3]}"), ProtocolError);
  EXPECT_THROW(decode_host("{\"t\": 1, \"cmd\": [0,0,0,0,0,0,0,0,0,0,0,0,\"x\"]}"), ProtocolError);
}

ModeEpisode direct_run(ExecMode mode, const SongTimeline& song, const PolicyFn& policy) {
  ModeConfig cfg;
  cfg.mode = mode;
  InternalPlant plant(perturbed_params(nominal_params(), 1.0));
  return run_mode_episode(policy, song, cfg, plant, nullptr, 4);
}

TEST(Bridge, LoopbackMatchesDirectPlant) {
  const auto song = load_song(kSongDir / "twinkle.txt");
  const auto policy = testing::scripted_player();
  for (ExecMode mode : {ExecMode::kJointMirroring, ExecMode::kHybrid, ExecMode::kRealWorld}) {
    InternalPlant device_plant(perturbed_params(nominal_params(), 1.0));
    DeviceServer server(device_plant);
    LoopbackTransport transport(server);
    BridgePlant bridge(transport);
    ModeConfig cfg;
    cfg.mode = mode;
    const auto via_bridge = run_mode_episode(policy, song, cfg, bridge, nullptr, 4);
    const auto direct = direct_run(mode, song, policy);
    EXPECT_FALSE(via_bridge.aborted);
    EXPECT_EQ(via_bridge.plant_keys, direct.plant_keys);
    EXPECT_EQ(via_bridge.plant.f1, direct.plant.f1);
    EXPECT_EQ(via_bridge.plant.precision, direct.plant.precision);
    EXPECT_EQ(bridge.deadline_misses(), 0u);
  }
}

TEST(Bridge, MissedDeadlineReusesLastState) {
  const auto song = load_song(kSongDir / "c_major.txt");
  InternalPlant device_plant(nominal_params());
  DeviceServer server(device_plant);
  LoopbackTransport transport(server);
  // Reply 0 answers the reset; drop the replies to commands 10 and 20.
  transport.set_drop([](std::uint64_t i) { return i == 11 || i == 21; });
  BridgePlant bridge(transport);
  ModeConfig cfg;
  cfg.mode = ExecMode::kHybrid;
  const auto ep = run_mode_episode(testing::scripted_player(), song, cfg, bridge);
  EXPECT_FALSE(ep.aborted);
  EXPECT_EQ(ep.stale_steps, 2u);
  EXPECT_EQ(bridge.deadline_misses(), 2u);
  EXPECT_EQ(ep.plant_keys[10], ep.plant_keys[9]);
  EXPECT_EQ(ep.plant_keys[20], ep.plant_keys[19]);
  bool late_logged = false;
  for (const auto& e : bridge.events()) late_logged = late_logged || e.find("deadline missed at t=10") != std::string::npos;
  EXPECT_TRUE(late_logged);
}

TEST(Bridge, ThreeConsecutiveMissesAbort) {
  const auto song = load_song(kSongDir / "c_major.txt");
  InternalPlant device_plant(nominal_params());
  DeviceServer server(device_plant);
  LoopbackTransport transport(server);
  transport.set_drop([](std::uint64_t i) { return i >= 6 && i <= 8; });
  BridgePlant bridge(transport);
  ModeConfig cfg;
  std::ostringstream log;
  const auto ep = run_mode_episode(testing::scripted_player(), song, cfg, bridge, &log);
  EXPECT_TRUE(ep.aborted);
  EXPECT_NE(ep.abort_message.find("consecutive"), std::string::npos);
  EXPECT_EQ(ep.plant_keys.size(), 7u);  // steps 0..4 fresh, 5..6 stale, abort at 7
  EXPECT_NE(log.str().find("aborted"), std::string::npos);
}

TEST(Bridge, LateRepliesAreDiscarded) {
  InternalPlant device_plant(nominal_params());
  DeviceServer server(device_plant);
  LoopbackTransport transport(server);
  BridgePlant bridge(transport);
  bridge.reset(0);
  transport.inject(encode(DeviceMessage{0, {1}, std::nullopt}));
  const auto r = bridge.command(0, reference_state(0.2).q);
  EXPECT_EQ(r.t, 1u);
  EXPECT_FALSE(r.stale);
  ASSERT_FALSE(bridge.events().empty());
  EXPECT_NE(bridge.events().back().find("late reply t=0"), std::string::npos);
}

TEST(Bridge, ReplyFromTheFutureIsProtocolError) {
  InternalPlant device_plant(nominal_params());
  DeviceServer server(device_plant);
  LoopbackTransport transport(server);
  BridgePlant bridge(transport);
  bridge.reset(0);
  transport.inject(encode(DeviceMessage{9, {}, std::nullopt}));
  EXPECT_THROW(bridge.command(0, reference_state(0.2).q), ProtocolError);
}

TEST(Bridge, SocketTransportMatchesLoopback) {
  int fds[2];
  ASSERT_EQ(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds), 0);
  InternalPlant device_plant(perturbed_params(nominal_params(), 1.0));
  DeviceServer server(device_plant);
  std::thread device([&] {
    FdTransport t(fds[1], fds[1], true);
    serve_device(t, server);
  });
  const auto song = load_song(kSongDir / "twinkle.txt");
  ModeEpisode ep;
  {
    FdTransport host(fds[0], fds[0], true);
    BridgeConfig bc;
    bc.deadline = std::chrono::milliseconds(2000);  // generous: the device shares one core
    BridgePlant bridge(host, bc);
    ModeConfig cfg;
    cfg.mode = ExecMode::kHybrid;
    ep = run_mode_episode(testing::scripted_player(), song, cfg, bridge, nullptr, 4);
  }
  device.join();
  const auto direct = direct_run(ExecMode::kHybrid, song, testing::scripted_player());
  EXPECT_FALSE(ep.aborted);
  EXPECT_EQ(ep.plant_keys, direct.plant_keys);
}

TEST(Bridge, SilentDeviceFailsAtConnect) {
  int fds[2];
  ASSERT_EQ(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds), 0);
  FdTransport host(fds[0], fds[0], true);
  BridgeConfig bc;
  bc.connect_timeout = std::chrono::milliseconds(50);
  EXPECT_THROW(BridgePlant(host, bc), ProtocolError);
  ::close(fds[1]);
}

TEST(Bridge, UnreachableTcpIsPlantError) {
  EXPECT_THROW(FdTransport::connect_tcp("127.0.0.1", 1), PlantError);
}

}  // namespace
}  // namespace pianorl

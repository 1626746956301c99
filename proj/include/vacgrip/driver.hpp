/*
 * Copyright (c) 2026 The vacgrip Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <chrono>
#include <optional>

#include "vacgrip/byte_stream.hpp"
#include "vacgrip/device_state.hpp"
#include "vacgrip/protocol.hpp"

namespace vacgrip::driver {

struct EffectorStatus {
  DeviceState confirmed;
  double pressure_kpa = 0.0;
  wire::Fault fault = wire::Fault::None;
  std::uint64_t staleness = 0;  // ticks since the last status arrived
};

struct DriverOptions {
  std::chrono::milliseconds confirm_timeout{200};
  std::uint64_t query_period_ticks = 30;  // staleness limit is three periods
};

/// Host-side client for one arm's suction controller. Every call either ends
/// in a confirmed status or throws a wire-level error such as TimeoutError.
/// An instance may be handed between threads but used by one at a time.
class SuctionClient {
 public:
  /// `tx` carries commands to the controller, `rx` carries its replies; they
  /// may be the same duplex stream.
  SuctionClient(wire::Channel channel, ByteStream& tx, ByteStream& rx, DriverOptions opts = {});

  EffectorStatus set_suction(bool on);
  EffectorStatus poll_status();

  /// Advances the staleness clock by one control tick. Throws DesyncError
  /// once no status has arrived for three query periods.
  void tick();

  wire::Channel channel() const { return channel_; }
  const EffectorStatus& status() const { return status_; }
  bool believed_on() const { return status_.confirmed.suction_active(); }

 private:
  wire::StatusFrame exchange(wire::CommandKind kind);

  wire::Channel channel_;
  ByteStream* tx_;
  ByteStream* rx_;
  DriverOptions opts_;
  wire::StatusDecoder decoder_;
  EffectorStatus status_;
};

/// Combined two-arm suction interface. Gripper widths are not sent over the
/// suction link; callers pass them to the arm directly.
class Effector {
 public:
  Effector(SuctionClient& left, SuctionClient& right) : left_(&left), right_(&right) {}

  EffectorStatus set_suction(wire::Channel ch, bool on) { return client(ch).set_suction(on); }
  EffectorStatus poll_status(wire::Channel ch) { return client(ch).poll_status(); }
  SuctionClient& client(wire::Channel ch) { return ch == wire::Channel::Left ? *left_ : *right_; }

 private:
  SuctionClient* left_;
  SuctionClient* right_;
};

}  // namespace vacgrip::driver

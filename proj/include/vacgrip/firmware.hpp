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

#include <functional>
#include <utility>

#include "vacgrip/byte_stream.hpp"
#include "vacgrip/device_state.hpp"
#include "vacgrip/pneumatics.hpp"
#include "vacgrip/protocol.hpp"

namespace vacgrip::firmware {

/// Gauge pressure in kPa converted to the status frame's centi-kPa field,
/// rounded and clamped to [-6000, 0].
std::int16_t to_centi_kpa(double gauge_kpa);

/// Applies one command to the controller. TurnOn closes the valve and starts
/// the pump together; TurnOff vents and stops the pump together; Query only
/// reads. The returned status reflects the post-command state.
/// Throws ChannelMismatch if the command addresses the other arm.
std::pair<DeviceState, wire::StatusFrame> handle_command(const DeviceState& state, const wire::CommandFrame& cmd,
                                                         const PressureStated& pressure,
                                                         wire::Fault fault = wire::Fault::None);

/// Reads the current line pressure for the controller's channel.
using PressureSource = std::function<PressureStated()>;

/// One emulated controller: state machine plus test-only fault hooks.
class Device {
 public:
  Device(wire::Channel channel, PressureSource pressure);

  wire::StatusFrame handle(const wire::CommandFrame& cmd);

  const DeviceState& state() const { return state_; }
  wire::Channel channel() const { return state_.channel; }

  /// Test hook: report a fault code in every following status.
  void inject_fault(wire::Fault f) { fault_ = f; }
  /// Test hook: acknowledge commands without actuating (a stuck relay).
  void set_stuck(bool stuck) { stuck_ = stuck; }

 private:
  DeviceState state_;
  PressureSource pressure_;
  wire::Fault fault_ = wire::Fault::None;
  bool stuck_ = false;
};

struct LoopStats {
  std::size_t commands = 0;
  std::size_t statuses = 0;
  std::size_t rejected_frames = 0;
};

/// Service loop: decodes commands from `in`, answers each valid one with
/// exactly one status on `out`. Malformed bytes produce nothing. Returns when
/// `in` closes; a trailing partial frame is discarded.
LoopStats run_device_loop(ByteStream& in, ByteStream& out, Device& device);

/// Synchronous in-process link to a Device: bytes written are decoded and
/// handled immediately, replies are queued for reading. Used where the whole
/// rig must stay single-threaded and deterministic.
class LoopbackLink final : public ByteStream {
 public:
  explicit LoopbackLink(Device& device) : device_(&device) {}

  void write(std::span<const std::uint8_t> bytes) override;
  ReadResult read_some(std::span<std::uint8_t> out, std::chrono::milliseconds timeout) override;
  void close() override { closed_ = true; }

  /// Test hook: flip one bit of every outgoing status byte at this offset.
  void corrupt_replies(int byte_offset) { corrupt_offset_ = byte_offset; }

 private:
  Device* device_;
  wire::CommandDecoder decoder_;
  wire::Bytes outbox_;
  bool closed_ = false;
  int corrupt_offset_ = -1;
};

}  // namespace vacgrip::firmware

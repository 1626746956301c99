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

#include "vacgrip/firmware.hpp"

#include <array>
#include <cmath>

#include "vacgrip/errors.hpp"

namespace vacgrip::firmware {

std::int16_t to_centi_kpa(double gauge_kpa) {
  const double c = std::round(gauge_kpa * 100.0);
  return static_cast<std::int16_t>(std::clamp(c, static_cast<double>(wire::kMinPressureCentiKpa), 0.0));
}

std::pair<DeviceState, wire::StatusFrame> handle_command(const DeviceState& state, const wire::CommandFrame& cmd,
                                                         const PressureStated& pressure, wire::Fault fault) {
  if (cmd.channel != state.channel) {
    throw ChannelMismatch("command for " + std::string(wire::to_string(cmd.channel)) + " sent to " +
                          std::string(wire::to_string(state.channel)) + " controller");
  }
  DeviceState next = state;
  switch (cmd.kind) {
    case wire::CommandKind::TurnOn:
      next.valve_closed = true;
      next.pump_on = true;
      break;
    case wire::CommandKind::TurnOff:
      next.valve_closed = false;
      next.pump_on = false;
      break;
    case wire::CommandKind::Query:
      break;
  }
  ++next.uptime_ticks;
  wire::StatusFrame st{next.channel, next.pump_on, next.valve_closed, to_centi_kpa(pressure.gauge_kpa), fault};
  return {next, st};
}

Device::Device(wire::Channel channel, PressureSource pressure)
    : state_(DeviceState::idle(channel)), pressure_(std::move(pressure)) {}

wire::StatusFrame Device::handle(const wire::CommandFrame& cmd) {
  const PressureStated p = pressure_ ? pressure_() : PressureStated{};
  if (stuck_) {
    auto [_, st] = handle_command(state_, wire::CommandFrame{wire::CommandKind::Query, cmd.channel}, p, fault_);
    return st;
  }
  auto [next, st] = handle_command(state_, cmd, p, fault_);
  state_ = next;
  return st;
}

LoopStats run_device_loop(ByteStream& in, ByteStream& out, Device& device) {
  LoopStats stats;
  wire::CommandDecoder decoder;
  std::array<std::uint8_t, 256> buf{};
  for (;;) {
    const ReadResult r = in.read_some(buf, std::chrono::milliseconds(50));
    if (r.count > 0) decoder.feed(std::span(buf.data(), r.count));
    for (;;) {
      auto d = decoder.next();
      if (d.status == wire::DecodeStatus::Truncated) break;
      if (!d.frame) continue;
      ++stats.commands;
      wire::StatusFrame st;
      try {
        st = device.handle(*d.frame);
      } catch (const ChannelMismatch&) {
        // Another controller's frame on a shared line; not ours to answer.
        continue;
      }
      try {
        out.write(wire::encode_status(st));
      } catch (const StreamClosed&) {
        stats.rejected_frames = decoder.errors();
        return stats;
      }
      ++stats.statuses;
    }
    if (r.closed) break;
  }
  stats.rejected_frames = decoder.errors();
  return stats;
}

void LoopbackLink::write(std::span<const std::uint8_t> bytes) {
  if (closed_) throw StreamClosed("loopback link severed");
  decoder_.feed(bytes);
  for (;;) {
    auto d = decoder_.next();
    if (d.status == wire::DecodeStatus::Truncated) break;
    if (!d.frame) continue;
    auto reply = wire::encode_status(device_->handle(*d.frame));
    if (corrupt_offset_ >= 0 && static_cast<std::size_t>(corrupt_offset_) < reply.size()) {
      reply[static_cast<std::size_t>(corrupt_offset_)] ^= 0x01;
    }
    outbox_.insert(outbox_.end(), reply.begin(), reply.end());
  }
}

ReadResult LoopbackLink::read_some(std::span<std::uint8_t> out, std::chrono::milliseconds) {
  if (closed_) return {0, true};
  const std::size_t n = std::min(out.size(), outbox_.size());
  std::copy_n(outbox_.begin(), n, out.begin());
  outbox_.erase(outbox_.begin(), outbox_.begin() + static_cast<std::ptrdiff_t>(n));
  return {n, false};
}

}  // namespace vacgrip::firmware

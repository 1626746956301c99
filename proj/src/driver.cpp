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

#include "vacgrip/driver.hpp"

#include <array>
#include <string>

#include "vacgrip/errors.hpp"

namespace vacgrip::driver {

SuctionClient::SuctionClient(wire::Channel channel, ByteStream& tx, ByteStream& rx, DriverOptions opts)
    : channel_(channel), tx_(&tx), rx_(&rx), opts_(opts) {
  status_.confirmed = DeviceState::idle(channel);
}

wire::StatusFrame SuctionClient::exchange(wire::CommandKind kind) {
  const auto timeout = [&] {
    return TimeoutError("no status from " + std::string(wire::to_string(channel_)) + " controller within " +
                        std::to_string(opts_.confirm_timeout.count()) + " ms");
  };
  try {
    tx_->write(wire::encode_command({kind, channel_}));
  } catch (const StreamClosed&) {
    throw timeout();
  }

  const auto deadline = std::chrono::steady_clock::now() + opts_.confirm_timeout;
  std::array<std::uint8_t, 64> buf{};
  for (;;) {
    for (;;) {
      auto d = decoder_.next();
      if (d.status == wire::DecodeStatus::Truncated) break;
      if (d.status == wire::DecodeStatus::ChecksumMismatch) {
        decoder_.clear();
        throw ChecksumError("corrupted status frame from " + std::string(wire::to_string(channel_)) + " controller");
      }
      if (d.frame && d.frame->channel == channel_) return *d.frame;
    }
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) throw timeout();
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    const ReadResult r = rx_->read_some(buf, std::max(left, std::chrono::milliseconds(1)));
    if (r.count > 0) decoder_.feed(std::span(buf.data(), r.count));
    if (r.closed) throw timeout();
  }
}

EffectorStatus SuctionClient::set_suction(bool on) {
  const auto st = exchange(on ? wire::CommandKind::TurnOn : wire::CommandKind::TurnOff);
  status_.confirmed.pump_on = st.pump_on;
  status_.confirmed.valve_closed = st.valve_closed;
  ++status_.confirmed.uptime_ticks;
  status_.pressure_kpa = st.pressure_centi_kpa / 100.0;
  status_.fault = st.fault;
  status_.staleness = 0;
  if (st.pump_on != on || st.valve_closed != on) {
    throw DesyncError(std::string(wire::to_string(channel_)) + " controller did not confirm suction " +
                      (on ? "on" : "off"));
  }
  return status_;
}

EffectorStatus SuctionClient::poll_status() {
  const auto st = exchange(wire::CommandKind::Query);
  const bool was_on = status_.confirmed.suction_active();
  status_.confirmed.pump_on = st.pump_on;
  status_.confirmed.valve_closed = st.valve_closed;
  status_.pressure_kpa = st.pressure_centi_kpa / 100.0;
  status_.fault = st.fault;
  status_.staleness = 0;
  if (st.pump_on != st.valve_closed || st.pump_on != was_on || st.fault == wire::Fault::Desync) {
    throw DesyncError(std::string(wire::to_string(channel_)) + " controller state differs from the commanded state");
  }
  return status_;
}

void SuctionClient::tick() {
  ++status_.staleness;
  if (status_.staleness > 3 * opts_.query_period_ticks) {
    throw DesyncError("no status from " + std::string(wire::to_string(channel_)) + " controller for " +
                      std::to_string(status_.staleness) + " ticks");
  }
}

}  // namespace vacgrip::driver

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

#include <cstdint>

#include "vacgrip/protocol.hpp"

namespace vacgrip {

/// Pump/valve state of one arm's suction controller. Only two combinations are
/// reachable through the firmware: suction active (pump on, valve closed) and
/// vented idle (pump off, valve open).
struct DeviceState {
  bool pump_on = false;
  bool valve_closed = false;
  wire::Channel channel = wire::Channel::Left;
  std::uint64_t uptime_ticks = 0;

  bool suction_active() const { return pump_on && valve_closed; }
  bool mixed() const { return pump_on != valve_closed; }

  static DeviceState idle(wire::Channel ch) { return DeviceState{false, false, ch, 0}; }
  static DeviceState active(wire::Channel ch) { return DeviceState{true, true, ch, 0}; }

  friend bool operator==(const DeviceState&, const DeviceState&) = default;
};

}  // namespace vacgrip

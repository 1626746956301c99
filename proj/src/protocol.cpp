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

#include "vacgrip/protocol.hpp"

#include <algorithm>

#include "vacgrip/errors.hpp"

namespace vacgrip::wire {

namespace {

struct RawScan {
  DecodeStatus status;
  std::span<const std::uint8_t> payload;
  std::size_t consumed;
};

// Finds the first candidate frame whose length byte equals `expected_len`.
RawScan scan_frame(std::span<const std::uint8_t> bytes, std::size_t expected_len) {
  const auto sof = std::find(bytes.begin(), bytes.end(), kStartOfFrame);
  const auto start = static_cast<std::size_t>(sof - bytes.begin());
  if (sof == bytes.end()) return {DecodeStatus::Truncated, {}, bytes.size()};
  if (bytes.size() - start < 2) return {DecodeStatus::Truncated, {}, start};

  const std::uint8_t length = bytes[start + 1];
  if (length != expected_len || length > kMaxPayload) return {DecodeStatus::BadLength, {}, start + 1};

  const std::size_t total = 3 + length;
  if (bytes.size() - start < total) return {DecodeStatus::Truncated, {}, start};

  const auto payload = bytes.subspan(start + 2, length);
  if (checksum(length, payload) != bytes[start + 2 + length]) {
    return {DecodeStatus::ChecksumMismatch, {}, start + 1};
  }
  return {DecodeStatus::Ok, payload, start + total};
}

bool valid_channel(std::uint8_t c) { return c <= 0x01; }

}  // namespace

std::string_view to_string(DecodeStatus s) {
  switch (s) {
    case DecodeStatus::Ok: return "Ok";
    case DecodeStatus::Truncated: return "Truncated";
    case DecodeStatus::ChecksumMismatch: return "ChecksumMismatch";
    case DecodeStatus::UnknownOpcode: return "UnknownOpcode";
    case DecodeStatus::InvalidField: return "InvalidField";
    case DecodeStatus::BadLength: return "BadLength";
  }
  return "?";
}

std::string_view to_string(Channel c) { return c == Channel::Left ? "left" : "right"; }

std::string_view to_string(CommandKind k) {
  switch (k) {
    case CommandKind::TurnOff: return "TurnOff";
    case CommandKind::TurnOn: return "TurnOn";
    case CommandKind::Query: return "Query";
  }
  return "?";
}

std::string_view to_string(Fault f) {
  switch (f) {
    case Fault::None: return "None";
    case Fault::PumpStall: return "PumpStall";
    case Fault::Desync: return "Desync";
  }
  return "?";
}

std::uint8_t checksum(std::uint8_t length, std::span<const std::uint8_t> payload) {
  std::uint8_t x = length;
  for (auto b : payload) x ^= b;
  return x;
}

Bytes frame_payload(std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxPayload) throw RangeError("payload exceeds 16 bytes");
  const auto length = static_cast<std::uint8_t>(payload.size());
  Bytes out;
  out.reserve(payload.size() + 3);
  out.push_back(kStartOfFrame);
  out.push_back(length);
  out.insert(out.end(), payload.begin(), payload.end());
  out.push_back(checksum(length, payload));
  return out;
}

Bytes encode_command(const CommandFrame& cmd) {
  const std::array<std::uint8_t, kCommandPayload> payload{static_cast<std::uint8_t>(cmd.kind),
                                                          static_cast<std::uint8_t>(cmd.channel)};
  return frame_payload(payload);
}

DecodeResult<CommandFrame> decode_command(std::span<const std::uint8_t> bytes) {
  const RawScan raw = scan_frame(bytes, kCommandPayload);
  if (raw.status != DecodeStatus::Ok) return {raw.status, std::nullopt, raw.consumed};

  const std::uint8_t op = raw.payload[0];
  const std::uint8_t ch = raw.payload[1];
  // Rejected frames only skip their start byte so an overlapped frame survives.
  const std::size_t skip = raw.consumed - (3 + kCommandPayload) + 1;
  if (op > static_cast<std::uint8_t>(CommandKind::Query)) return {DecodeStatus::UnknownOpcode, std::nullopt, skip};
  if (!valid_channel(ch)) return {DecodeStatus::InvalidField, std::nullopt, skip};
  return {DecodeStatus::Ok, CommandFrame{static_cast<CommandKind>(op), static_cast<Channel>(ch)}, raw.consumed};
}

Bytes encode_status(const StatusFrame& st) {
  if (st.pressure_centi_kpa < kMinPressureCentiKpa || st.pressure_centi_kpa > 0) {
    throw RangeError("status pressure " + std::to_string(st.pressure_centi_kpa) + " outside [-6000, 0]");
  }
  const auto p = static_cast<std::uint16_t>(st.pressure_centi_kpa);
  const std::uint8_t flags = (st.pump_on ? 0x01 : 0x00) | (st.valve_closed ? 0x02 : 0x00);
  const std::array<std::uint8_t, kStatusPayload> payload{kStatusOpcode,
                                                         static_cast<std::uint8_t>(st.channel),
                                                         flags,
                                                         static_cast<std::uint8_t>(p & 0xFF),
                                                         static_cast<std::uint8_t>(p >> 8),
                                                         static_cast<std::uint8_t>(st.fault)};
  return frame_payload(payload);
}

DecodeResult<StatusFrame> decode_status(std::span<const std::uint8_t> bytes) {
  const RawScan raw = scan_frame(bytes, kStatusPayload);
  if (raw.status != DecodeStatus::Ok) return {raw.status, std::nullopt, raw.consumed};

  const auto& pl = raw.payload;
  const std::size_t skip = raw.consumed - (3 + kStatusPayload) + 1;
  if (pl[0] != kStatusOpcode) return {DecodeStatus::UnknownOpcode, std::nullopt, skip};
  const auto pressure = static_cast<std::int16_t>(static_cast<std::uint16_t>(pl[3] | (pl[4] << 8)));
  if (!valid_channel(pl[1]) || (pl[2] & ~0x03) != 0 || pl[5] > static_cast<std::uint8_t>(Fault::Desync) ||
      pressure < kMinPressureCentiKpa || pressure > 0) {
    return {DecodeStatus::InvalidField, std::nullopt, skip};
  }
  StatusFrame st;
  st.channel = static_cast<Channel>(pl[1]);
  st.pump_on = (pl[2] & 0x01) != 0;
  st.valve_closed = (pl[2] & 0x02) != 0;
  st.pressure_centi_kpa = pressure;
  st.fault = static_cast<Fault>(pl[5]);
  return {DecodeStatus::Ok, st, raw.consumed};
}

namespace {
DecodeResult<CommandFrame> decode_one(std::span<const std::uint8_t> b, CommandFrame*) { return decode_command(b); }
DecodeResult<StatusFrame> decode_one(std::span<const std::uint8_t> b, StatusFrame*) { return decode_status(b); }
}  // namespace

template <typename Frame>
DecodeResult<Frame> StreamDecoder<Frame>::next() {
  auto r = decode_one(buffer_, static_cast<Frame*>(nullptr));
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(r.consumed));
  if (r.status != DecodeStatus::Ok && r.status != DecodeStatus::Truncated) ++errors_;
  return r;
}

template class StreamDecoder<CommandFrame>;
template class StreamDecoder<StatusFrame>;

}  // namespace vacgrip::wire

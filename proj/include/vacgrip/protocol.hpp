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

/**
 * Framed byte protocol between the host and the suction controller.
 *
 * Every frame on the wire is
 *
 *   0xAA | length | payload[length] | checksum
 *
 * where checksum is the XOR of the length byte and every payload byte and
 * length never exceeds kMaxPayload. Command frames carry a two byte payload
 * {opcode, channel}. Status frames carry six bytes
 * {0x10, channel, flags, pressure lo, pressure hi, fault} with pressure as a
 * little-endian int16 in hundredths of a kPa (gauge).
 *
 * Decoders scan forward for the start byte, so garbage on the line is skipped.
 * A frame that fails validation is dropped by advancing one byte past its
 * start byte, which lets a real frame hidden inside a bogus candidate be
 * recovered on the next call.
 */

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace vacgrip::wire {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kStartOfFrame = 0xAA;
inline constexpr std::size_t kMaxPayload = 16;
inline constexpr std::size_t kCommandPayload = 2;
inline constexpr std::size_t kStatusPayload = 6;
inline constexpr std::uint8_t kStatusOpcode = 0x10;
inline constexpr std::int16_t kMinPressureCentiKpa = -6000;

enum class Channel : std::uint8_t { Left = 0x00, Right = 0x01 };

enum class CommandKind : std::uint8_t { TurnOff = 0x00, TurnOn = 0x01, Query = 0x02 };

enum class Fault : std::uint8_t { None = 0x00, PumpStall = 0x01, Desync = 0x02 };

struct CommandFrame {
  CommandKind kind = CommandKind::Query;
  Channel channel = Channel::Left;
  friend bool operator==(const CommandFrame&, const CommandFrame&) = default;
};

struct StatusFrame {
  Channel channel = Channel::Left;
  bool pump_on = false;
  bool valve_closed = false;
  std::int16_t pressure_centi_kpa = 0;
  Fault fault = Fault::None;
  friend bool operator==(const StatusFrame&, const StatusFrame&) = default;
};

enum class DecodeStatus {
  Ok,
  Truncated,         // need more bytes; nothing from the start byte on was consumed
  ChecksumMismatch,  // candidate dropped, stream advanced past its start byte
  UnknownOpcode,     // checksum fine but the opcode is not one we know
  InvalidField,      // checksum fine, opcode known, some other field out of domain
  BadLength,         // length byte does not match the expected frame kind
};

std::string_view to_string(DecodeStatus s);
std::string_view to_string(Channel c);
std::string_view to_string(CommandKind k);
std::string_view to_string(Fault f);

template <typename Frame>
struct DecodeResult {
  DecodeStatus status = DecodeStatus::Truncated;
  std::optional<Frame> frame;
  std::size_t consumed = 0;
};

/// XOR fold of the length byte and the payload.
std::uint8_t checksum(std::uint8_t length, std::span<const std::uint8_t> payload);

/// Wraps a payload (at most kMaxPayload bytes) in a frame.
Bytes frame_payload(std::span<const std::uint8_t> payload);

Bytes encode_command(const CommandFrame& cmd);
DecodeResult<CommandFrame> decode_command(std::span<const std::uint8_t> bytes);

/// Throws RangeError if the pressure is outside [-6000, 0].
Bytes encode_status(const StatusFrame& st);
DecodeResult<StatusFrame> decode_status(std::span<const std::uint8_t> bytes);

/// Accumulates bytes from a stream and hands out frames one at a time. Error
/// outcomes are reported (and counted) so callers can surface them.
template <typename Frame>
class StreamDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes) { buffer_.insert(buffer_.end(), bytes.begin(), bytes.end()); }

  /// Returns the next non-Truncated outcome, or a Truncated result when the
  /// buffer holds no complete candidate.
  DecodeResult<Frame> next();

  std::size_t buffered() const { return buffer_.size(); }
  std::size_t errors() const { return errors_; }
  void clear() { buffer_.clear(); }

 private:
  Bytes buffer_;
  std::size_t errors_ = 0;
};

using CommandDecoder = StreamDecoder<CommandFrame>;
using StatusDecoder = StreamDecoder<StatusFrame>;

extern template class StreamDecoder<CommandFrame>;
extern template class StreamDecoder<StatusFrame>;

}  // namespace vacgrip::wire

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

#include <doctest.h>

#include <random>

#include "vacgrip/errors.hpp"
#include "vacgrip/protocol.hpp"

using namespace vacgrip;
using namespace vacgrip::wire;

namespace {

// Independent frame builder: XOR of length and payload, written out by hand.
Bytes reference_frame(std::initializer_list<std::uint8_t> payload) {
  Bytes out{0xAA, static_cast<std::uint8_t>(payload.size())};
  std::uint8_t x = static_cast<std::uint8_t>(payload.size());
  for (auto b : payload) {
    out.push_back(b);
    x ^= b;
  }
  out.push_back(x);
  return out;
}

StatusFrame random_status(std::mt19937_64& rng) {
  StatusFrame s;
  s.channel = rng() & 1 ? Channel::Right : Channel::Left;
  s.pump_on = rng() & 1;
  s.valve_closed = rng() & 1;
  s.pressure_centi_kpa = static_cast<std::int16_t>(-static_cast<int>(rng() % 6001));
  s.fault = static_cast<Fault>(rng() % 3);
  return s;
}

}  // namespace

TEST_CASE("command encoding matches the documented bytes") {
  CHECK(encode_command({CommandKind::TurnOn, Channel::Left}) == Bytes{0xAA, 0x02, 0x01, 0x00, 0x03});
  CHECK(encode_command({CommandKind::TurnOff, Channel::Right}) == Bytes{0xAA, 0x02, 0x00, 0x01, 0x03});
  CHECK(encode_command({CommandKind::Query, Channel::Left}) == Bytes{0xAA, 0x02, 0x02, 0x00, 0x00});
  CHECK(encode_command({CommandKind::Query, Channel::Right}) == reference_frame({0x02, 0x01}));
}

TEST_CASE("decode_command") {
  SUBCASE("valid frame") {
    const Bytes b{0xAA, 0x02, 0x01, 0x00, 0x03};
    const auto r = decode_command(b);
    REQUIRE(r.status == DecodeStatus::Ok);
    CHECK(*r.frame == CommandFrame{CommandKind::TurnOn, Channel::Left});
    CHECK(r.consumed == 5);
  }
  SUBCASE("bad checksum") {
    const Bytes b{0xAA, 0x02, 0x01, 0x00, 0xFF};
    const auto r = decode_command(b);
    CHECK(r.status == DecodeStatus::ChecksumMismatch);
    CHECK_FALSE(r.frame);
    CHECK(r.consumed == 1);
  }
  SUBCASE("leading garbage is skipped") {
    const Bytes b{0x00, 0xAA, 0x02, 0x02, 0x00, 0x00};
    const auto r = decode_command(b);
    REQUIRE(r.status == DecodeStatus::Ok);
    CHECK(*r.frame == CommandFrame{CommandKind::Query, Channel::Left});
    CHECK(r.consumed == 6);
  }
  SUBCASE("truncated frame consumes nothing from the start byte") {
    const Bytes b{0x13, 0xAA, 0x02, 0x01};
    const auto r = decode_command(b);
    CHECK(r.status == DecodeStatus::Truncated);
    CHECK(r.consumed == 1);
  }
  SUBCASE("unknown opcode") {
    const auto b = reference_frame({0x07, 0x00});
    CHECK(decode_command(b).status == DecodeStatus::UnknownOpcode);
  }
  SUBCASE("unknown channel") {
    const auto b = reference_frame({0x01, 0x05});
    CHECK(decode_command(b).status == DecodeStatus::InvalidField);
  }
  SUBCASE("status-sized payload is not a command") {
    const auto b = reference_frame({0x01, 0x00, 0x00});
    CHECK(decode_command(b).status == DecodeStatus::BadLength);
  }
}

TEST_CASE("status round trip") {
  const StatusFrame full{Channel::Left, true, true, -6000, Fault::None};
  CHECK(*decode_status(encode_status(full)).frame == full);
  const StatusFrame zero{};
  CHECK(*decode_status(encode_status(zero)).frame == zero);

  StatusFrame bad = full;
  bad.pressure_centi_kpa = -6001;
  CHECK_THROWS_AS(encode_status(bad), RangeError);
  bad.pressure_centi_kpa = 1;
  CHECK_THROWS_AS(encode_status(bad), RangeError);
}

TEST_CASE("status pressure is little-endian int16") {
  const auto b = encode_status({Channel::Right, true, true, -6000, Fault::PumpStall});
  // -6000 = 0xE890
  CHECK(b == reference_frame({0x10, 0x01, 0x03, 0x90, 0xE8, 0x01}));
}

TEST_CASE("status decode rejects out-of-range pressure even with a good checksum") {
  // +1 centi-kPa: 0x0001
  const auto b = reference_frame({0x10, 0x00, 0x00, 0x01, 0x00, 0x00});
  CHECK(decode_status(b).status == DecodeStatus::InvalidField);
}

TEST_CASE("property: status round trip over random frames") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20000; ++i) {
    const auto s = random_status(rng);
    const auto r = decode_status(encode_status(s));
    REQUIRE(r.status == DecodeStatus::Ok);
    REQUIRE(*r.frame == s);
  }
}

TEST_CASE("single-bit corruption never yields a different valid frame") {
  // With an XOR checksum over length and payload every single-bit flip in
  // those bytes or in the checksum byte changes the parity, so the measured
  // collision rate is zero.
  std::mt19937_64 rng(5);
  std::size_t flips = 0, silent = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_status(rng);
    const auto frame = encode_status(s);
    for (std::size_t byte = 1; byte < frame.size(); ++byte) {
      for (int bit = 0; bit < 8; ++bit) {
        auto f = frame;
        f[byte] ^= static_cast<std::uint8_t>(1u << bit);
        const auto r = decode_status(f);
        ++flips;
        if (r.status == DecodeStatus::Ok && *r.frame != s) ++silent;
        CHECK(r.status != DecodeStatus::Ok);
      }
    }
  }
  CHECK(flips > 0);
  CHECK(silent == 0);
}

TEST_CASE("stream decoder resynchronises after garbage") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    CommandDecoder d;
    Bytes garbage(rng() % 40);
    for (auto& b : garbage) b = static_cast<std::uint8_t>(rng());
    d.feed(garbage);
    while (d.next().status != DecodeStatus::Truncated) {
    }
    // A stray start byte may still be waiting for its length; a fresh valid
    // frame after a run of padding always comes out.
    const Bytes pad(kMaxPayload + 3, 0x00);
    d.feed(pad);
    const CommandFrame want{CommandKind::TurnOff, Channel::Right};
    d.feed(encode_command(want));
    std::optional<CommandFrame> got;
    for (;;) {
      const auto r = d.next();
      if (r.status == DecodeStatus::Truncated) break;
      if (r.frame) got = r.frame;
    }
    REQUIRE(got);
    CHECK(*got == want);
  }
}

TEST_CASE("frame hidden inside a bogus candidate is recovered") {
  // AA 05 looks like a long frame; the real command starts at the second AA.
  Bytes b{0xAA, 0x05};
  const auto real = encode_command({CommandKind::TurnOn, Channel::Right});
  b.insert(b.end(), real.begin(), real.end());
  CommandDecoder d;
  d.feed(b);
  std::optional<CommandFrame> got;
  for (int i = 0; i < 10 && !got; ++i) {
    const auto r = d.next();
    if (r.status == DecodeStatus::Truncated) break;
    got = r.frame;
  }
  REQUIRE(got);
  CHECK(*got == CommandFrame{CommandKind::TurnOn, Channel::Right});
  CHECK(d.errors() >= 1);
}

TEST_CASE("frame_payload bounds") {
  const Bytes too_long(kMaxPayload + 1, 0);
  CHECK_THROWS_AS(frame_payload(too_long), RangeError);
  CHECK(checksum(2, std::vector<std::uint8_t>{0x01, 0x00}) == 0x03);
}

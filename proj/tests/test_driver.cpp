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

#include <thread>

#include "vacgrip/driver.hpp"
#include "vacgrip/errors.hpp"
#include "vacgrip/firmware.hpp"

using namespace vacgrip;
using namespace std::chrono_literals;

namespace {

struct Bench {
  PressureStated line;
  firmware::Device device{wire::Channel::Left, [this] { return line; }};
  firmware::LoopbackLink link{device};
  driver::SuctionClient client{wire::Channel::Left, link, link, driver::DriverOptions{50ms, 30}};
};

}  // namespace

TEST_CASE("set_suction confirms the device state") {
  Bench b;
  const auto st = b.client.set_suction(true);
  CHECK(st.confirmed.pump_on);
  CHECK(st.confirmed.valve_closed);
  CHECK(b.device.state().suction_active());

  const auto again = b.client.set_suction(true);
  CHECK(again.confirmed.pump_on == st.confirmed.pump_on);
  CHECK(again.confirmed.valve_closed == st.confirmed.valve_closed);

  b.client.set_suction(false);
  CHECK_FALSE(b.client.believed_on());
  CHECK_FALSE(b.device.state().pump_on);
}

TEST_CASE("believed state tracks the device after every command") {
  Bench b;
  const bool script[] = {true, true, false, true, false, false, true};
  for (bool on : script) {
    b.client.set_suction(on);
    CHECK(b.client.believed_on() == b.device.state().suction_active());
    CHECK(b.client.status().confirmed.pump_on == b.device.state().pump_on);
    CHECK(b.client.status().confirmed.valve_closed == b.device.state().valve_closed);
  }
}

TEST_CASE("poll_status reports pressure from the line") {
  Bench b;
  auto st = b.client.poll_status();
  CHECK_FALSE(st.confirmed.pump_on);
  CHECK(st.pressure_kpa == doctest::Approx(0.0));

  b.client.set_suction(true);
  b.line.gauge_kpa = -42.17;
  st = b.client.poll_status();
  CHECK(st.pressure_kpa == doctest::Approx(-42.17));
}

TEST_CASE("severed link times out") {
  Bench b;
  b.link.close();
  CHECK_THROWS_AS(b.client.set_suction(true), TimeoutError);
  CHECK_THROWS_AS(b.client.poll_status(), TimeoutError);
}

TEST_CASE("silent device times out over a pipe") {
  BytePipe tx, rx;
  driver::SuctionClient c(wire::Channel::Right, tx, rx, driver::DriverOptions{30ms, 30});
  const auto t0 = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(c.set_suction(true), TimeoutError);
  CHECK(std::chrono::steady_clock::now() - t0 >= 30ms);
}

TEST_CASE("corrupted reply surfaces as ChecksumError") {
  Bench b;
  b.link.corrupt_replies(4);
  CHECK_THROWS_AS(b.client.set_suction(true), ChecksumError);
}

TEST_CASE("stuck relay is reported as desync") {
  Bench b;
  b.device.set_stuck(true);
  CHECK_THROWS_AS(b.client.set_suction(true), DesyncError);
  CHECK_FALSE(b.client.believed_on());
}

TEST_CASE("state changed behind the driver's back is flagged on poll") {
  PressureStated line;
  firmware::Device dev(wire::Channel::Left, [&] { return line; });
  firmware::LoopbackLink link(dev);
  driver::SuctionClient a(wire::Channel::Left, link, link);
  driver::SuctionClient b(wire::Channel::Left, link, link);
  a.set_suction(true);
  CHECK_THROWS_AS(b.poll_status(), DesyncError);
}

TEST_CASE("staleness limit is three query periods") {
  Bench b;
  b.client.poll_status();
  for (int i = 0; i < 90; ++i) b.client.tick();
  CHECK(b.client.status().staleness == 90);
  CHECK_THROWS_AS(b.client.tick(), DesyncError);
  b.client.poll_status();
  CHECK(b.client.status().staleness == 0);
}

TEST_CASE("driver and device on separate threads over pipes") {
  PressureStated line;
  firmware::Device dev(wire::Channel::Right, [&] { return line; });
  BytePipe to_dev, from_dev;
  std::thread loop([&] { firmware::run_device_loop(to_dev, from_dev, dev); });
  driver::SuctionClient c(wire::Channel::Right, to_dev, from_dev, driver::DriverOptions{1000ms, 30});
  for (int i = 0; i < 50; ++i) {
    const bool on = i % 2 == 0;
    CHECK(c.set_suction(on).confirmed.suction_active() == on);
  }
  to_dev.close();
  loop.join();
  CHECK_FALSE(dev.state().pump_on);
}

TEST_CASE("driver talks to the device over TCP") {
  PressureStated line;
  line.gauge_kpa = -7.5;
  firmware::Device dev(wire::Channel::Left, [&] { return line; });
  TcpListener listener("127.0.0.1:0");
  std::thread server([&] {
    auto conn = listener.accept();
    firmware::run_device_loop(*conn, *conn, dev);
  });
  auto stream = TcpStream::connect("127.0.0.1:" + std::to_string(listener.port()));
  driver::SuctionClient c(wire::Channel::Left, *stream, *stream, driver::DriverOptions{1000ms, 30});
  CHECK(c.set_suction(true).confirmed.suction_active());
  CHECK(c.poll_status().pressure_kpa == doctest::Approx(-7.5));
  stream->close();
  server.join();
  CHECK(dev.state().suction_active());
}

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

#include <filesystem>
#include <thread>

#include "vacgrip/episode_io.hpp"
#include "vacgrip/errors.hpp"
#include "vacgrip/scene_io.hpp"
#include "vacgrip/teleop.hpp"

using namespace vacgrip;
using namespace vacgrip::teleop;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "vacgrip_teleop" / name;
  fs::remove_all(dir);
  return dir;
}

SessionOptions options(const std::string& name) {
  SessionOptions o;
  o.episode_dir = fresh_dir(name);
  return o;
}

// Task 1 with the left tool resting just above the glass slide.
sim::Scene over_slide() {
  json j = json::parse(sim::builtin_scene_text(1));
  j["arms"]["left"] = {{"position", {0.35, 0.30, 0.006}}, {"width", 0.07}};
  return sim::parse_scene(j);
}

TeleopInput toggle(sim::Arm a) {
  TeleopInput in;
  in.suction_toggle_edge[static_cast<std::size_t>(sim::index(a))] = true;
  return in;
}

TeleopInput jog(sim::Arm a, double dx, double dy, double dz) {
  TeleopInput in;
  Vector6d d = Vector6d::Zero();
  d.head<3>() = Vec3d(dx, dy, dz);
  in.pose_delta[static_cast<std::size_t>(sim::index(a))] = d;
  return in;
}

TeleopInput control(RecordControl rc) {
  TeleopInput in;
  in.record_control = std::move(rc);
  return in;
}

RecordControl start(int task = 0) {
  RecordControl rc;
  rc.kind = RecordControl::Kind::Start;
  rc.task_id = task;
  return rc;
}

RecordControl stop(bool save = true) {
  RecordControl rc;
  rc.kind = RecordControl::Kind::Stop;
  rc.save = save;
  return rc;
}

RecordControl mark(std::string text) {
  RecordControl rc;
  rc.kind = RecordControl::Kind::MarkSubtask;
  rc.text = std::move(text);
  return rc;
}

Vec3d left_tool(const Session& s) { return sim::tool_pose(s.scene(), sim::Arm::Left).translation(); }

}  // namespace

TEST_CASE("toggle edges switch suction and are confirmed in the ack") {
  Session s("t", sim::builtin_scene(1), options("toggle"));
  auto ack = s.apply_input(toggle(sim::Arm::Left));
  CHECK(ack.suction_confirmed == std::array<bool, 2>{true, false});
  CHECK(ack.error == std::nullopt);
  // The controller is on before the sim has stepped.
  CHECK_FALSE(s.scene().arm(sim::Arm::Left).suction_on);
  s.tick();
  CHECK(s.scene().arm(sim::Arm::Left).suction_on);
  ack = s.apply_input(toggle(sim::Arm::Left));
  CHECK(ack.suction_confirmed == std::array<bool, 2>{false, false});
  s.tick();
  CHECK_FALSE(s.scene().arm(sim::Arm::Left).suction_on);
  CHECK(s.toggle_log() == std::vector<std::string>{"left on", "left off"});
}

TEST_CASE("two edges inside one tick cancel out") {
  Session s("t", sim::builtin_scene(1), options("double"));
  s.apply_input(control(start(1)));
  s.apply_input(toggle(sim::Arm::Right));
  s.apply_input(toggle(sim::Arm::Right));
  s.tick();
  CHECK(s.toggle_log() == std::vector<std::string>{"right on", "right off"});
  CHECK_FALSE(s.scene().arm(sim::Arm::Right).suction_on);
  const auto ack = s.apply_input(control(stop()));
  REQUIRE(ack.saved_path);
  const auto ep = data::read_episode(*ack.saved_path);
  CHECK(ep.steps.at(0).action[15] == 0.0);
}

TEST_CASE("recording runs at the scene rate") {
  const auto opts = options("rate");
  Session s("t", sim::builtin_scene(3), opts);
  auto ack = s.apply_input(control(start()));
  CHECK(ack.recording);
  for (int i = 0; i < 900; ++i) s.tick();
  CHECK(s.recorded_steps() == 900);
  ack = s.apply_input(control(stop()));
  REQUIRE(ack.saved_path);
  CHECK(fs::path(*ack.saved_path) == opts.episode_dir / "task3_0000.ep");
  const auto ep = data::read_episode(*ack.saved_path);
  REQUIRE(ep.steps.size() == 900);
  CHECK(ep.meta.task_id == 3);
  CHECK(ep.meta.rate_hz == 30.0);
  CHECK(ep.steps.back().t == doctest::Approx(899.0 / 30.0));
  CHECK(s.progress().at(3) == std::pair<int, int>{1, 100});
  CHECK_FALSE(s.recording());

  // A new session counts what is already on disk.
  Session again("u", sim::builtin_scene(3), opts);
  CHECK(again.progress().at(3).first == 1);
  again.apply_input(control(start()));
  again.tick();
  CHECK(fs::path(*again.apply_input(control(stop())).saved_path).filename() == "task3_0001.ep");
}

TEST_CASE("start, stop and discard") {
  Session s("t", sim::builtin_scene(2), options("discard"));
  CHECK(s.apply_input(control(stop())).error == "not recording");
  CHECK(s.apply_input(control(mark("x"))).error == "not recording");
  s.apply_input(control(start()));
  CHECK(s.apply_input(control(start())).error == "already recording");
  auto ack = s.apply_input(control(stop()));
  CHECK_FALSE(ack.saved_path);
  CHECK(ack.error->find("not saved") == 0);
  s.apply_input(control(start()));
  for (int i = 0; i < 10; ++i) s.tick();
  ack = s.apply_input(control(stop(false)));
  CHECK_FALSE(ack.saved_path);
  CHECK_FALSE(ack.error);
  CHECK(s.progress().at(2).first == 0);
}

TEST_CASE("subtask markers carry forward") {
  Session s("t", sim::builtin_scene(1), options("subtask"));
  RecordControl rc = start(1);
  rc.instruction = "tidy up";
  rc.arm = "left";
  s.apply_input(control(rc));
  s.tick();
  s.apply_input(control(mark("use the left arm to suction the glass slide")));
  for (int i = 0; i < 3; ++i) s.tick();
  CHECK(s.snapshot()["subtask"] == "use the left arm to suction the glass slide");
  s.apply_input(control(mark("place it in the tray")));
  s.tick();
  const auto path = s.apply_input(control(stop())).saved_path;
  REQUIRE(path);
  const auto ep = data::read_episode(*path);
  CHECK(ep.meta.instruction == "tidy up");
  CHECK(ep.meta.arm == "left");
  CHECK_FALSE(ep.steps[0].subtask);
  const auto spans = ep.subtasks();
  REQUIRE(spans.size() == 2);
  CHECK(spans[0] == data::SubtaskSpan{1, 4, "use the left arm to suction the glass slide"});
  CHECK(spans[1] == data::SubtaskSpan{4, 5, "place it in the tray"});
}

TEST_CASE("the episode buffer is bounded") {
  auto opts = options("overflow");
  opts.max_episode_s = 1.0;
  Session s("t", sim::builtin_scene(4), opts);
  s.apply_input(control(start()));
  for (int i = 0; i < 45; ++i) s.tick();
  CHECK(s.recorded_steps() == 30);
  CHECK(s.snapshot()["buffer_full"] == true);
  const auto ack = s.apply_input(TeleopInput{});
  CHECK(ack.error == "episode buffer full; stop to save");
  const auto saved = s.apply_input(control(stop()));
  REQUIRE(saved.saved_path);
  CHECK(data::read_episode(*saved.saved_path).steps.size() == 30);
  CHECK(s.snapshot()["buffer_full"] == false);
}

TEST_CASE("inputs over the rate budget are flagged and coalesced") {
  double now = 100.0;
  auto opts = options("ratelimit");
  opts.clock = [&] { return now; };
  Session s("t", sim::builtin_scene(1), opts);
  const Vec3d p0 = left_tool(s);
  int limited = 0;
  for (int i = 0; i < 130; ++i) limited += s.apply_input(jog(sim::Arm::Left, 0.0001, 0, 0)).rate_limited;
  CHECK(limited == 10);
  s.tick();
  CHECK((left_tool(s) - p0).x() == doctest::Approx(0.013));
  now += 1.001;
  CHECK_FALSE(s.apply_input(TeleopInput{}).rate_limited);

  // Jogs are clamped to the speed limit per tick.
  const Vec3d p1 = left_tool(s);
  s.apply_input(jog(sim::Arm::Left, 0.0, 0.5, 0));
  s.tick();
  CHECK((left_tool(s) - p1).norm() == doctest::Approx(0.5 / 30.0));
}

TEST_CASE("width targets are clamped to the stroke") {
  Session s("t", sim::builtin_scene(1), options("width"));
  TeleopInput in;
  in.gripper_width_target[1] = 0.5;
  s.apply_input(in);
  s.tick();
  CHECK(s.scene().arm(sim::Arm::Right).gripper_width == 0.07);
  in.gripper_width_target[1] = 0.02;
  s.apply_input(in);
  s.tick();
  CHECK(s.scene().arm(sim::Arm::Right).gripper_width == 0.02);
}

TEST_CASE("teleoperated suction pick of the glass slide") {
  Session s("t", over_slide(), options("pick"));
  s.apply_input(control(start(1)));
  s.apply_input(toggle(sim::Arm::Left));
  for (int i = 0; i < 30; ++i) s.tick();
  const auto sc = s.scene();
  CHECK(sim::holder_of(sc, "slide") == sim::Arm::Left);
  CHECK(std::abs(sc.arm(sim::Arm::Left).pressure.gauge_kpa + 60.0) <= 0.02 * 60.0);
  for (int i = 0; i < 12; ++i) {
    s.apply_input(jog(sim::Arm::Left, 0, 0, 0.01));
    s.tick();
  }
  CHECK(s.scene().at("slide").bottom_z() == doctest::Approx(0.12));
  s.apply_input(toggle(sim::Arm::Left));
  s.tick();
  CHECK_FALSE(sim::holder_of(s.scene(), "slide"));
  const auto ack = s.apply_input(control(stop()));
  REQUIRE(ack.saved_path);

  const auto ep = data::read_episode(*ack.saved_path);
  CHECK(ep.steps.size() == 43);
  // Suction bits flip exactly where the operator toggled.
  CHECK(data::toggle_edges(ep.actions()) == std::vector<std::size_t>{42});
  CHECK(ep.steps[0].action[14] == 1.0);
  // Recorded pressure follows the line model.
  CHECK(ep.steps[30].pressure_kpa[0] == doctest::Approx(sc.arm(sim::Arm::Left).pressure.gauge_kpa));
  const auto replay = sim::replay_episode(ep);
  CHECK_FALSE(replay.first_mismatch);
  CHECK(sim::same_state(replay.final_scene, s.scene()));
}

TEST_CASE("observers") {
  auto opts = options("observers");
  opts.subscriber_queue = 100;
  Session s("t", sim::builtin_scene(2), opts);
  auto sub = s.subscribe();
  CHECK(s.subscriber_count() == 1);
  const auto first = sub->pop();
  REQUIRE(first);
  const auto j = json::parse(*first);
  CHECK(j["type"] == "snapshot");
  CHECK(j["session"] == "t");
  CHECK(j["progress"]["1"]["goal"] == 200);

  for (int i = 0; i < 30; ++i) s.tick();
  int frames = 0;
  std::optional<std::string> last;
  while (auto f = sub->pop()) {
    ++frames;
    last = f;
  }
  CHECK(frames == 21);  // 20 Hz display from a 30 Hz loop
  // An idle scene publishes identical frames.
  s.tick();
  s.tick();
  CHECK(sub->pop() == last);
  CHECK(s.snapshot().dump() == *last);

  s.unsubscribe(sub);
  CHECK(sub->closed());
  CHECK(s.subscriber_count() == 0);
}

TEST_CASE("a slow observer loses its oldest frames") {
  Subscriber sub(3);
  for (int i = 0; i < 10; ++i) sub.push(std::to_string(i));
  CHECK(sub.dropped() == 7);
  CHECK(sub.pop() == "7");
  CHECK(sub.pop() == "8");
  CHECK(sub.pop() == "9");
  CHECK_FALSE(sub.pop());
  sub.close();
  sub.push("late");
  CHECK_FALSE(sub.pop(std::chrono::milliseconds(50)));
}

TEST_CASE("closed sessions refuse work") {
  Session s("t", sim::builtin_scene(1), options("closed"));
  auto sub = s.subscribe();
  s.start();
  s.close();
  CHECK(s.closed());
  CHECK(sub->closed());
  CHECK_THROWS_AS(s.apply_input(TeleopInput{}), SessionClosed);
  CHECK_THROWS_AS(s.subscribe(), SessionClosed);
  CHECK_THROWS_AS(s.start(), SessionClosed);
}

TEST_CASE("background loop advances the sim") {
  Session s("t", sim::builtin_scene(4), options("loop"));
  s.apply_input(control(start()));
  s.start();
  std::this_thread::sleep_for(std::chrono::milliseconds(400));
  s.stop();
  const auto n = s.recorded_steps();
  CHECK(n >= 3);
  CHECK(n <= 14);
}

TEST_CASE("input records") {
  const auto in = input_from_json(json::parse(R"({
      "pose_delta": {"left": [0.01, 0, 0, 0, 0, 0.1]},
      "gripper_width_target": {"right": 0.04},
      "suction_toggle_edge": {"right": true},
      "record_control": {"kind": "start", "task_id": 3, "instruction": "open", "arm": "right"}})"));
  REQUIRE(in.pose_delta[0]);
  CHECK((*in.pose_delta[0])[5] == 0.1);
  CHECK_FALSE(in.pose_delta[1]);
  CHECK(in.gripper_width_target[1] == 0.04);
  CHECK(in.suction_toggle_edge == std::array<bool, 2>{false, true});
  REQUIRE(in.record_control);
  CHECK(in.record_control->task_id == 3);
  CHECK(in.record_control->arm == "right");
  CHECK(to_json(input_from_json(to_json(in))) == to_json(in));

  const char* bad[] = {
      R"([1, 2])",
      R"({"jump": true})",
      R"({"pose_delta": {"left": [1, 2, 3]}})",
      R"({"pose_delta": {"middle": [0, 0, 0, 0, 0, 0]}})",
      R"({"pose_delta": {"left": [0, 0, 0, 0, 0, "x"]}})",
      R"({"gripper_width_target": {"left": -0.01}})",
      R"({"suction_toggle_edge": {"left": 1}})",
      R"({"record_control": {"kind": "pause"}})",
      R"({"record_control": {"kind": "start", "arm": "both-ish"}})",
      R"({"record_control": {"kind": "start", "task_id": "three"}})",
  };
  for (const char* text : bad) {
    INFO(text);
    CHECK_THROWS_AS(input_from_json(json::parse(text)), DomainError);
  }

  Ack a;
  a.seq = 4;
  a.saved_path = "x.ep";
  const auto aj = to_json(a);
  CHECK(aj["type"] == "ack");
  CHECK(aj["seq"] == 4);
  CHECK(aj["saved_path"] == "x.ep");
  CHECK_FALSE(aj.contains("error"));
}

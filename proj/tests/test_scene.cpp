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
#include "vacgrip/scene.hpp"
#include "vacgrip/scene_io.hpp"

using namespace vacgrip;
using namespace vacgrip::sim;
using nlohmann::json;

namespace {

Scene jar_scene() {
  return parse_scene(json::parse(R"({
    "name": "jar", "task_id": 0,
    "objects": [
      {"id": "jar", "size": [0.12, 0.12, 0.12], "position": [0.5, 0.25], "mass": 0.537,
       "material": "glass", "suction_faces": ["+z"]}
    ]})"));
}

void place_tool(Scene& s, Arm a, const Vec3d& p, double width, const Vec3d& rpy = Vec3d::Zero()) {
  auto& st = s.arm(a);
  st.joints = s.maps[static_cast<std::size_t>(index(a))].joints_for(p, rpy);
  st.gripper_width = width;
}

ArmCommand command(const Scene& s, Arm a, const Vec3d& p, double width, bool suction) {
  ArmCommand c;
  c << s.maps[static_cast<std::size_t>(index(a))].joints_for(p, Vec3d::Zero()), width, suction ? 1.0 : 0.0;
  return c;
}

Scene step_left(Scene s, const ArmCommand& left) {
  const auto right = current_command(s, Arm::Right);
  return step_scene(std::move(s), left, right, s.dt());
}

bool has_event(const Scene& s, const std::string& e) {
  return std::find(s.events.begin(), s.events.end(), e) != s.events.end();
}

}  // namespace

TEST_CASE("rpy_near inverts rotation_from_rpy") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-3.1, 3.1), pitch(-1.5, 1.5), shift(-1, 1);
  for (int i = 0; i < 5000; ++i) {
    const Vec3d rpy(ang(rng), pitch(rng), ang(rng));
    const Mat3d R = rotation_from_rpy(rpy);
    const Vec3d back = rpy_near(R, rpy);
    REQUIRE((back - rpy).norm() < 1e-9);
    // A reference one turn away selects the shifted triple.
    const Vec3d turned = rpy + Vec3d(2 * kPi, 0, -2 * kPi);
    REQUIRE((rpy_near(R, turned) - turned).norm() < 1e-9);
    // Any reference gives a triple that reproduces R.
    const Vec3d ref(shift(rng) * 6, shift(rng) * 6, shift(rng) * 6);
    REQUIRE((rotation_from_rpy(rpy_near(R, ref)) - R).norm() < 1e-9);
  }
}

TEST_CASE("joint map round trip") {
  JointMap m;
  m.origin = Vec3d(0.1, -0.2, 0.05);
  m.gain = Vec3d(0.5, 2.0, -1.0);
  const Vec3d p(0.4, 0.1, 0.3), rpy(0.1, -0.2, 0.3);
  const auto j = m.joints_for(p, rpy);
  CHECK((m.position(j) - p).norm() < 1e-12);
  CHECK(m.rpy(j) == rpy);
  CHECK(m.in_workspace(p));
  CHECK_FALSE(m.in_workspace(Vec3d(2, 0, 0)));
}

TEST_CASE("builtin scenes parse and rest on their supports") {
  for (int t = 1; t <= 4; ++t) {
    const Scene s = builtin_scene(t);
    CHECK(s.task_id == t);
    CHECK_FALSE(s.instruction.empty());
    for (const auto& o : s.objects) {
      if (o.is_free()) CHECK(is_supported(s, o));
    }
  }
  CHECK(resolve_scene("task2").task_id == 2);
  CHECK_THROWS_AS(builtin_scene(5), ConfigError);
  CHECK_THROWS_AS(resolve_scene("nowhere.scene"), ConfigError);
}

TEST_CASE("scene validation") {
  auto bad = [](const char* text) { return parse_scene(json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({"objects": [{"id": "a", "size": [0, 1, 1], "position": [0.5, 0]}]})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"objects": [{"id": "a", "size": [1, 1, 1], "position": [0.5, 0], "material": "x"}]})"),
                  ConfigError);
  CHECK_THROWS_AS(
      bad(R"({"objects": [{"id": "a", "size": [1, 1, 1], "position": [0.5, 0], "suction_faces": ["top"]}]})"),
      ConfigError);
  CHECK_THROWS_AS(bad(R"({"objects": [{"id": "a", "size": [1, 1, 1], "position": [0.5, 0], "resting_on": "b"}]})"),
                  ConfigError);
  CHECK_THROWS_AS(bad(R"({"objects": [{"id": "a", "size": [1, 1, 1], "position": [0.5, 0]},
                                      {"id": "a", "size": [1, 1, 1], "position": [0.5, 0]}]})"),
                  ConfigError);
  CHECK_THROWS_AS(bad(R"({"arms": {"left": {"position": [5, 0, 0]}}, "objects": []})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"objects": [{"id": "d", "size": [1, 1, 1], "position": [0.5, 0],
                        "articulation": {"type": "screw", "axis": [1, 0, 0], "range": [0, 1]}}]})"),
                  ConfigError);
}

TEST_CASE("a no-op action leaves every builtin scene unchanged") {
  for (int t = 1; t <= 4; ++t) {
    const Scene s0 = builtin_scene(t);
    Scene s = s0;
    for (int k = 0; k < 60; ++k) s = step_scene(s, current_action(s));
    CHECK(same_state(s, s0));
    CHECK(s.tick == 60);
    CHECK(snapshot_json(s) == snapshot_json(s0));
  }
}

TEST_CASE("suction lifts a 537 g jar with both cups sealed") {
  Scene s = jar_scene();
  const Vec3d above(0.5, 0.25, 0.121);
  place_tool(s, Arm::Left, above, 0.07);
  s = step_left(s, command(s, Arm::Left, above, 0.07, true));
  REQUIRE(s.arm(Arm::Left).attached);
  CHECK(s.arm(Arm::Left).attached->mode == AttachMode::SuctionWide);
  CHECK(s.arm(Arm::Left).attached->cup_sealed == std::array<bool, 2>{true, true});
  for (int k = 0; k < 30; ++k) s = step_left(s, command(s, Arm::Left, above, 0.07, true));
  CHECK(s.arm(Arm::Left).pressure.gauge_kpa < -55.0);

  const double z0 = s.at("jar").pose.translation().z();
  const Vec3d lifted = above + Vec3d(0, 0, 0.1);
  for (int k = 0; k < 15; ++k) s = step_left(s, command(s, Arm::Left, lifted, 0.07, true));
  CHECK(holder_of(s, "jar") == Arm::Left);
  CHECK(s.at("jar").pose.translation().z() - z0 == doctest::Approx(0.1).epsilon(1e-9));

  // Venting lets go and the jar falls back to the table.
  s = step_left(s, command(s, Arm::Left, lifted, 0.07, false));
  CHECK(has_event(s, "left released jar"));
  CHECK_FALSE(holder_of(s, "jar"));
  CHECK(s.at("jar").bottom_z() == doctest::Approx(0.0));
}

TEST_CASE("lifting before the line is evacuated drops the jar") {
  Scene s = jar_scene();
  const Vec3d above(0.5, 0.25, 0.121);
  place_tool(s, Arm::Left, above, 0.07);
  s = step_left(s, command(s, Arm::Left, above, 0.07, true));
  REQUIRE(s.arm(Arm::Left).attached);
  s = step_left(s, command(s, Arm::Left, above + Vec3d(0, 0, 0.1), 0.07, true));
  CHECK(has_event(s, "left lost suction on jar"));
  CHECK_FALSE(s.arm(Arm::Left).attached);
  CHECK(s.at("jar").bottom_z() == doctest::Approx(0.0));
}

TEST_CASE("one cup off the edge cannot hold the jar") {
  Scene s = jar_scene();
  s.arm(Arm::Left).suction_on = true;
  place_tool(s, Arm::Left, Vec3d(0.53, 0.25, 0.121), 0.07);
  const auto r = try_suction(s, Arm::Left, AttachMode::SuctionWide);
  CHECK_FALSE(r.attached);
  CHECK(r.cup_sealed == std::array<bool, 2>{true, false});
  CHECK(r.steady_force == doctest::Approx(2.65).epsilon(0.002));
  CHECK(r.required_force == doctest::Approx(7.90).epsilon(0.001));
  CHECK_FALSE(s.arm(Arm::Left).attached);
}

TEST_CASE("grasping") {
  Scene s = builtin_scene(1);
  const Vec3d cucumber = s.at("cucumber").pose.translation();
  const Vec3d slide = s.at("slide").pose.translation();

  SUBCASE("cucumber closes to its width") {
    place_tool(s, Arm::Right, cucumber, 0.07);
    Scene n = step_scene(s, current_command(s, Arm::Left), command(s, Arm::Right, cucumber, 0.04, false), s.dt());
    REQUIRE(holder_of(n, "cucumber") == Arm::Right);
    CHECK(n.arm(Arm::Right).attached->mode == AttachMode::Grasp);
    CHECK_FALSE(n.at("cucumber").resting_on);
    // Opening again lets it drop where it is.
    n = step_scene(n, current_command(n, Arm::Left), command(n, Arm::Right, cucumber, 0.07, false), n.dt());
    CHECK_FALSE(holder_of(n, "cucumber"));
    CHECK(is_supported(n, n.at("cucumber")));
  }
  SUBCASE("jaw opening must match") {
    place_tool(s, Arm::Right, cucumber, 0.02);
    const auto r = try_grasp(s, Arm::Right);
    CHECK_FALSE(r.attached);
    CHECK(r.reason == "jaw opening does not match cucumber");
  }
  SUBCASE("the glass slide is wider than the stroke") {
    place_tool(s, Arm::Left, slide, 0.07);
    const auto r = try_grasp(s, Arm::Left);
    CHECK_FALSE(r.attached);
    CHECK(r.reason == "slide is wider than the gripper stroke");
  }
  SUBCASE("empty air") {
    place_tool(s, Arm::Left, Vec3d(0.5, 0.1, 0.3), 0.04);
    CHECK(try_grasp(s, Arm::Left).reason == "nothing between the jaws");
  }
}

TEST_CASE("suction on the slide in both modes") {
  const Scene s0 = builtin_scene(1);
  const Vec3d top = s0.at("slide").pose.translation() + Vec3d(0, 0, s0.at("slide").half_extents.z() + 0.001);

  for (double width : {0.07, 0.0}) {
    Scene s = s0;
    place_tool(s, Arm::Left, top, width);
    s = step_left(s, command(s, Arm::Left, top, width, true));
    REQUIRE(holder_of(s, "slide") == Arm::Left);
    CHECK(s.arm(Arm::Left).attached->mode == (width > 0 ? AttachMode::SuctionWide : AttachMode::SuctionPoint));
  }

  Scene off = s0;
  place_tool(off, Arm::Left, top + Vec3d(0.12, 0, 0), 0.07);
  off.arm(Arm::Left).suction_on = true;
  const auto r = try_suction(off, Arm::Left, AttachMode::SuctionWide);
  CHECK_FALSE(r.attached);
  CHECK(r.cup_sealed == std::array<bool, 2>{true, false});

  Scene tilted = s0;
  place_tool(tilted, Arm::Left, top, 0.07, Vec3d(deg2rad(15.0), 0, 0));
  tilted.arm(Arm::Left).suction_on = true;
  CHECK(try_suction(tilted, Arm::Left, AttachMode::SuctionWide).reason == "no cup sealed");

  Scene off_state = s0;
  place_tool(off_state, Arm::Left, top, 0.07);
  CHECK(try_suction(off_state, Arm::Left, AttachMode::SuctionWide).reason == "suction is off");
  CHECK_THROWS_AS(try_suction(off_state, Arm::Left, AttachMode::Grasp), DomainError);
}

TEST_CASE("an object has at most one holder") {
  Scene s = builtin_scene(1);
  const Vec3d top = s.at("slide").pose.translation() + Vec3d(0, 0, s.at("slide").half_extents.z() + 0.001);
  place_tool(s, Arm::Left, top, 0.0);
  place_tool(s, Arm::Right, top, 0.07);
  s.arm(Arm::Left).suction_on = true;
  s.arm(Arm::Right).suction_on = true;
  REQUIRE(try_suction(s, Arm::Left, AttachMode::SuctionPoint).attached);
  CHECK_FALSE(try_suction(s, Arm::Right, AttachMode::SuctionWide).attached);
  CHECK(holder_of(s, "slide") == Arm::Left);
}

TEST_CASE("fixed furniture never attaches") {
  Scene s = parse_scene(json::parse(R"({"objects": [
      {"id": "bench", "size": [0.3, 0.3, 0.1], "position": [0.5, 0.25], "material": "glass",
       "suction_faces": ["+z"], "fixed": true}]})"));
  place_tool(s, Arm::Left, Vec3d(0.5, 0.25, 0.101), 0.07);
  s.arm(Arm::Left).suction_on = true;
  const auto r = try_suction(s, Arm::Left, AttachMode::SuctionWide);
  CHECK_FALSE(r.attached);
  CHECK(r.reason == "bench is fixed");
  CHECK(std::isinf(r.required_force));
}

TEST_CASE("property: random teleoperation keeps the world consistent") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 1; t <= 4; ++t) {
    Scene s = builtin_scene(t);
    ArmCommand cmd[2] = {current_command(s, Arm::Left), current_command(s, Arm::Right)};
    for (int k = 0; k < 1500; ++k) {
      for (auto& c : cmd) {
        for (int j = 0; j < 3; ++j) c[j] += 0.02 * u(rng);
        for (int j = 3; j < 6; ++j) c[j] = std::clamp(c[j] + 0.02 * u(rng), -0.3, 0.3);
        c[6] = std::clamp(c[6] + 0.01 * u(rng), 0.0, s.params.max_stroke);
        if (u(rng) > 0.97) c[7] = 1.0 - c[7];
      }
      s = step_scene(s, cmd[0], cmd[1], s.dt());
      for (Arm a : kArms) {
        const auto& st = s.arm(a);
        REQUIRE(st.pressure.gauge_kpa <= 0.0);
        REQUIRE(st.pressure.gauge_kpa >= s.params.pneumatics.p_min);
        REQUIRE(s.maps[static_cast<std::size_t>(index(a))].in_workspace(
            s.maps[static_cast<std::size_t>(index(a))].position(st.joints)));
        if (st.attached && is_suction(st.attached->mode)) REQUIRE(st.suction_on);
      }
      REQUIRE(!(s.arm(Arm::Left).attached && s.arm(Arm::Right).attached &&
                s.arm(Arm::Left).attached->object_id == s.arm(Arm::Right).attached->object_id));
      for (const auto& o : s.objects) {
        REQUIRE(o.bottom_z() >= -1e-9);
        if (o.articulation) {
          REQUIRE(o.articulation->value >= o.articulation->lower);
          REQUIRE(o.articulation->value <= o.articulation->upper);
        }
        if (o.is_free() && !holder_of(s, o.id)) REQUIRE(is_supported(s, o));
      }
    }
  }
}

TEST_CASE("stepping is deterministic and the state form round-trips") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  Scene a = builtin_scene(3), b = builtin_scene(3);
  for (int k = 0; k < 300; ++k) {
    ArmCommand l = current_command(a, Arm::Left), r = current_command(a, Arm::Right);
    for (int j = 0; j < 3; ++j) {
      l[j] += 0.02 * u(rng);
      r[j] += 0.02 * u(rng);
    }
    if (k == 100) l[7] = 1.0;
    a = step_scene(a, l, r, a.dt());
    b = step_scene(b, l, r, b.dt());
    REQUIRE(same_state(a, b));
    const Scene c = scene_from_state(scene_state(a));
    REQUIRE(same_state(a, c));
    REQUIRE(scene_state(c) == scene_state(a));
  }
}

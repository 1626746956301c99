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
 * Scripted prime actions. Each primitive is planned against the current
 * scene into a time-parameterized action sequence (approach, engage,
 * actuate, retreat) for one arm while the other arm holds still. Planning
 * throws PrimitiveInfeasible when the primitive cannot apply to its target.
 */

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vacgrip/scene.hpp"

namespace vacgrip::sim {

struct SuctionPick {
  std::string target;
  AttachMode mode = AttachMode::SuctionWide;
  std::string face = "+z";
};

struct GraspPick {
  std::string target;
};

/// Put the held object down. With `onto`, offset and yaw are in that
/// object's planar frame; without it they are world coordinates.
struct Place {
  std::optional<std::string> onto;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

/// Close a prismatic fixture with the jaws. No distance means fully closed.
struct Push {
  std::string target;
  std::optional<double> distance;
};

/// Open the held prismatic fixture by `distance` metres.
struct Pull {
  double distance = 0.0;
};

/// Rotate the held revolute fixture to `angle` radians.
struct Lift {
  double angle = 0.0;
};

/// Press down on the top face of the target.
struct Press {
  std::string target;
};

/// Keep both arms still.
struct Hold {
  double seconds = 0.0;
};

using Primitive = std::variant<SuctionPick, GraspPick, Place, Push, Pull, Lift, Press, Hold>;

std::string describe(const Primitive& p);

struct MotionLimits {
  double travel_height = 0.30;
  double linear_speed = 0.25;  // m/s
  double rot_speed = 1.0;      // rad/s
  double suction_dwell = 0.5;  // s, lets the line pressure build before moving
  double grip_dwell = 0.2;
  double release_dwell = 0.3;
  double approach_offset = 0.05;  // stand-off before side contact
  double place_clearance = 0.005;
  double push_overshoot = 0.005;
};

struct Plan {
  Arm arm = Arm::Left;
  std::vector<data::ActionVector> actions;
  std::string subtask;
  /// Object this arm must hold over [hold_from, hold_until).
  std::optional<std::string> hold_object;
  std::size_t hold_from = 0;
  std::size_t hold_until = 0;
};

/// Arm for a primitive: the holder for Place/Pull/Lift, otherwise the arm on
/// the target's side of the robot (y >= 0 is left).
Arm choose_arm(const Scene& s, const Primitive& p);

Plan plan_primitive(const Scene& s, Arm arm, const Primitive& p, const MotionLimits& lim = {});

/// Whether the primitive achieved its effect, judged from the scenes before
/// and after execution. Empty string means success, otherwise the reason.
std::string check_postcondition(const Scene& before, const Scene& after, Arm arm, const Primitive& p);

}  // namespace vacgrip::sim

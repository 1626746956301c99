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
 * Fixed-step kinematic world: two arms with jaw-mounted suction cups, box
 * shaped objects, and articulated fixtures (drawers, box flaps).
 *
 * Frames: world z is up and the table top is z = 0. A tool pose comes from
 * the arm's JointMap; with zero roll/pitch/yaw the tool approach axis points
 * down (-z) and the jaws open along world x. The two cups sit on the jaws, so
 * their spacing grows linearly with the gripper opening.
 *
 * There are no dynamics. Gravity only appears as the suction hold check and
 * the rule that a released or dropped object falls onto whatever is below it.
 */

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vacgrip/action_data.hpp"
#include "vacgrip/geometry.hpp"
#include "vacgrip/pneumatics.hpp"

namespace vacgrip::sim {

enum class Arm { Left = 0, Right = 1 };
inline constexpr std::array<Arm, 2> kArms{Arm::Left, Arm::Right};
inline int index(Arm a) { return static_cast<int>(a); }
std::string_view to_string(Arm a);
Arm arm_from_string(std::string_view s);

enum class AttachMode { Grasp, SuctionWide, SuctionPoint };
std::string_view to_string(AttachMode m);
inline bool is_suction(AttachMode m) { return m != AttachMode::Grasp; }

using ArmCommand = Eigen::Matrix<double, 8, 1>;  // 6 joints, width, suction

struct Articulation {
  enum class Kind { Prismatic, Revolute };
  Kind kind = Kind::Prismatic;
  Vec3d axis = Vec3d::UnitX();   // base frame; prismatic: opening direction, revolute: hinge direction
  Vec3d hinge = Vec3d::Zero();   // base frame point on the hinge line (revolute only)
  double lower = 0.0;
  double upper = 0.0;
  double value = 0.0;            // metres or radians
  double resist_force = 1.0;     // newtons needed to move it

  /// Transform from the object frame at `value` to the base frame.
  Posed joint_transform(double v) const;
};

struct SceneObject {
  std::string id;
  std::string label;
  Vec3d half_extents = Vec3d::Constant(0.01);
  Posed pose = Posed::Identity();
  double mass = 0.1;
  MaterialProfile material;
  std::optional<double> graspable_width;
  std::vector<std::string> suction_faces;  // box face tags: "+z", "-x", ...
  std::optional<Articulation> articulation;
  Posed base_pose = Posed::Identity();     // pose at articulation value 0
  bool fixed = false;                      // furniture; never attached or moved
  bool container = false;                  // open top; items that fit rest on the floor
  double floor_height = 0.005;
  std::optional<std::string> resting_on;   // support object; empty means the table

  bool is_free() const { return !fixed && !articulation; }
  /// Suction patches in world coordinates.
  std::vector<FacePatchd> world_faces() const;
  std::optional<FacePatchd> world_face(const std::string& tag) const;
  double bottom_z() const;
  double top_z() const;
  double vertical_half_extent() const;
};

struct Attachment {
  std::string object_id;
  AttachMode mode = AttachMode::Grasp;
  Posed object_in_tool = Posed::Identity();  // free objects
  Vec3d contact_local = Vec3d::Zero();       // articulated objects: tool point in object frame
  std::array<bool, 2> cup_sealed{false, false};
};

/// Linear stand-in for arm kinematics: joints[0..2] map to tool position,
/// joints[3..5] are roll/pitch/yaw.
struct JointMap {
  Vec3d origin = Vec3d::Zero();
  Vec3d gain = Vec3d::Ones();  // metres per joint unit
  Vec3d workspace_min = Vec3d(0.1, -0.6, 0.0);
  Vec3d workspace_max = Vec3d(0.95, 0.6, 0.7);

  Vec3d position(const data::JointVector& j) const;
  Vec3d rpy(const data::JointVector& j) const { return j.tail<3>(); }
  Posed tool_pose(const data::JointVector& j) const;
  data::JointVector joints_for(const Vec3d& position, const Vec3d& rpy) const;
  bool in_workspace(const Vec3d& p) const;
};

struct SimParams {
  double rate_hz = 30.0;
  double max_stroke = 0.07;
  double cup_mount_offset = 0.01;  // each cup sits this far outside its jaw
  double max_speed = 0.5;          // m/s
  double max_rot_speed = 2.0;      // rad/s per axis
  double grasp_tolerance = 0.005;
  double safety_factor = 1.5;
  double attach_break_distance = 0.02;
  SealTolerance<double> seal;
  PneumaticParamsd pneumatics;
};

struct ArmState {
  data::JointVector joints = data::JointVector::Zero();
  double gripper_width = 0.07;
  bool suction_on = false;
  PressureStated pressure;
  std::optional<Attachment> attached;
  bool workspace_violation = false;  // set by the last step
};

struct Scene {
  int task_id = 0;
  std::string name;
  std::string instruction;
  SimParams params;
  std::array<JointMap, 2> maps;
  std::array<ArmState, 2> arms;
  std::vector<SceneObject> objects;
  double time = 0.0;
  std::uint64_t tick = 0;
  std::vector<std::string> events;  // attachment/drop log of the last step

  ArmState& arm(Arm a) { return arms[static_cast<std::size_t>(index(a))]; }
  const ArmState& arm(Arm a) const { return arms[static_cast<std::size_t>(index(a))]; }
  SceneObject* find(const std::string& id);
  const SceneObject* find(const std::string& id) const;
  const SceneObject& at(const std::string& id) const;
  SceneObject& at(const std::string& id);
  double dt() const { return 1.0 / params.rate_hz; }
};

/// Exact comparison of everything except the clock and event log.
bool same_state(const Scene& a, const Scene& b);

Posed tool_pose(const Scene& s, Arm a);
std::array<CupPose<double>, 2> cup_poses(const Scene& s, Arm a);
std::optional<Arm> holder_of(const Scene& s, const std::string& object_id);

/// The arm's current joints/width/suction as a command (a no-op action).
ArmCommand current_command(const Scene& s, Arm a);
data::ActionVector current_action(const Scene& s);
ArmCommand arm_command(const data::ActionVector& a, Arm arm);
data::ActionVector make_action(const ArmCommand& left, const ArmCommand& right);

std::array<data::ArmReading, 2> arm_readings(const Scene& s);
data::ProprioState observe(const Scene& s);
/// Sets joints and widths from a proprio vector (suction is untouched).
void apply_proprio(Scene& s, const data::ProprioState& p);

/// Advances the world by dt. Steps: clamp the commanded motion to the speed
/// and workspace limits, release attachments whose actuator let go, update
/// line pressures, carry attached objects (breaking suction that cannot hold
/// the load), push fixtures touched by the jaws, then try new attachments.
Scene step_scene(Scene s, const ArmCommand& left, const ArmCommand& right, double dt);
Scene step_scene(Scene s, const data::ActionVector& action);

struct AttachResult {
  bool attached = false;
  std::string object_id;
  std::array<bool, 2> cup_sealed{false, false};
  double steady_force = 0.0;
  double required_force = 0.0;
  std::string reason;
};

/// Attaches when a graspable object sits between the jaws and its width is
/// within tolerance of the current opening.
AttachResult try_grasp(Scene& s, Arm a);

/// Seal-checks both cups against every suction face; attaches to the object
/// with the most sealed cups if the steady-state force covers its load.
AttachResult try_suction(Scene& s, Arm a, AttachMode mode);

/// Height of the surface the object would rest on at its current x/y, and
/// the id of that support (empty for the table).
std::pair<double, std::optional<std::string>> support_below(const Scene& s, const SceneObject& obj);
void drop_to_support(Scene& s, const std::string& object_id);
bool is_supported(const Scene& s, const SceneObject& obj);

/// Moves an object and everything resting on it.
void move_with_children(Scene& s, const std::string& object_id, const Posed& new_pose);

/// Object center inside the container footprint and resting in it.
bool inside(const Scene& s, const std::string& object_id, const std::string& container_id);

/// Face of a sliding fixture whose outward normal points along its opening
/// direction (the drawer front).
std::optional<FacePatchd> leading_face(const SceneObject& o);

/// Force needed to carry or actuate the object with suction.
double required_hold_force(const Scene& s, const SceneObject& obj);

}  // namespace vacgrip::sim

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

#include "vacgrip/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vacgrip/errors.hpp"

namespace vacgrip::sim {

namespace {

constexpr double kSupportTolerance = 1e-3;
constexpr double kContainerWall = 0.005;
constexpr double kFingerHalfDepth = 0.02;
constexpr double kPushReach = 0.05;
constexpr double kPushLateralMargin = 0.01;

std::pair<int, int> parse_face_tag(const std::string& tag) {
  if (tag.size() != 2 || (tag[0] != '+' && tag[0] != '-') || tag[1] < 'x' || tag[1] > 'z') {
    throw ConfigError("bad face tag '" + tag + "', expected one of +x -x +y -y +z -z");
  }
  return {tag[1] - 'x', tag[0] == '+' ? 1 : -1};
}

bool poses_equal(const Posed& a, const Posed& b) { return a.matrix() == b.matrix(); }

bool attachments_equal(const std::optional<Attachment>& a, const std::optional<Attachment>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->object_id == b->object_id && a->mode == b->mode && poses_equal(a->object_in_tool, b->object_in_tool) &&
         a->contact_local == b->contact_local && a->cup_sealed == b->cup_sealed;
}

bool is_descendant(const Scene& s, const SceneObject& candidate, const std::string& ancestor_id) {
  const SceneObject* o = &candidate;
  for (int guard = 0; guard < 64 && o->resting_on; ++guard) {
    if (*o->resting_on == ancestor_id) return true;
    o = s.find(*o->resting_on);
    if (!o) return false;
  }
  return false;
}

bool fits_inside(const SceneObject& obj, const SceneObject& c) {
  const Posed to_c = c.pose.inverse() * obj.pose;
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      const Vec3d corner = to_c * Vec3d(sx * obj.half_extents.x(), sy * obj.half_extents.y(), 0.0);
      if (std::abs(corner.x()) > c.half_extents.x() - kContainerWall ||
          std::abs(corner.y()) > c.half_extents.y() - kContainerWall) {
        return false;
      }
    }
  }
  return true;
}

Vec3d world_axis(const SceneObject& o) { return o.base_pose.linear() * o.articulation->axis; }

std::array<std::optional<std::size_t>, 2> cup_contacts(const Scene& s, Arm a) {
  const auto cups = cup_poses(s, a);
  std::array<std::optional<std::size_t>, 2> hit{};
  for (std::size_t c = 0; c < cups.size(); ++c) {
    for (std::size_t k = 0; k < s.objects.size() && !hit[c]; ++k) {
      const auto& o = s.objects[k];
      const auto holder = holder_of(s, o.id);
      if (holder && *holder != a) continue;
      for (const auto& face : o.world_faces()) {
        if (seal_check(cups[c], face, o.material, s.params.seal)) {
          hit[c] = k;
          break;
        }
      }
    }
  }
  return hit;
}

std::array<CupContact, 2> contacts_from(const Scene& s, const std::array<std::optional<std::size_t>, 2>& hit) {
  std::array<CupContact, 2> out{};
  for (std::size_t c = 0; c < 2; ++c) {
    if (hit[c]) out[c] = CupContact{true, s.objects[*hit[c]].material};
  }
  return out;
}

void release(Scene& s, Arm a, const char* why) {
  auto& st = s.arm(a);
  if (!st.attached) return;
  const std::string id = st.attached->object_id;
  st.attached.reset();
  s.events.push_back(std::string(to_string(a)) + " " + why + " " + id);
  if (s.at(id).is_free()) drop_to_support(s, id);
}

ArmCommand sanitize(const ArmCommand& c, const SimParams& p) {
  if (!c.allFinite()) throw DomainError("arm command is not finite");
  if (c[7] != 0.0 && c[7] != 1.0) throw DomainError("suction command must be 0 or 1");
  ArmCommand out = c;
  out[6] = std::clamp(c[6], 0.0, p.max_stroke);
  return out;
}

}  // namespace

std::string_view to_string(Arm a) { return a == Arm::Left ? "left" : "right"; }

Arm arm_from_string(std::string_view s) {
  if (s == "left") return Arm::Left;
  if (s == "right") return Arm::Right;
  throw ConfigError("unknown arm '" + std::string(s) + "'");
}

std::string_view to_string(AttachMode m) {
  switch (m) {
    case AttachMode::Grasp: return "grasp";
    case AttachMode::SuctionWide: return "suction-wide";
    case AttachMode::SuctionPoint: return "suction-point";
  }
  return "?";
}

Posed Articulation::joint_transform(double v) const {
  Posed t = Posed::Identity();
  if (kind == Kind::Prismatic) {
    t.translation() = axis.normalized() * v;
  } else {
    t = Eigen::Translation3d(hinge) * Eigen::AngleAxisd(v, axis.normalized()) * Eigen::Translation3d(-hinge);
  }
  return t;
}

std::vector<FacePatchd> SceneObject::world_faces() const {
  std::vector<FacePatchd> out;
  out.reserve(suction_faces.size());
  for (const auto& tag : suction_faces) {
    const auto [axis, sign] = parse_face_tag(tag);
    out.push_back(box_face<double>(half_extents, axis, sign).transformed(pose));
  }
  return out;
}

std::optional<FacePatchd> SceneObject::world_face(const std::string& tag) const {
  if (std::find(suction_faces.begin(), suction_faces.end(), tag) == suction_faces.end()) return std::nullopt;
  const auto [axis, sign] = parse_face_tag(tag);
  return box_face<double>(half_extents, axis, sign).transformed(pose);
}

double SceneObject::vertical_half_extent() const {
  const auto& R = pose.linear();
  return std::abs(R(2, 0)) * half_extents.x() + std::abs(R(2, 1)) * half_extents.y() +
         std::abs(R(2, 2)) * half_extents.z();
}

double SceneObject::bottom_z() const { return pose.translation().z() - vertical_half_extent(); }
double SceneObject::top_z() const { return pose.translation().z() + vertical_half_extent(); }

Vec3d JointMap::position(const data::JointVector& j) const {
  return origin + gain.cwiseProduct(Vec3d(j[0], j[1], j[2]));
}

Posed JointMap::tool_pose(const data::JointVector& j) const {
  return make_pose<double>(position(j), rotation_from_rpy<double>(rpy(j)));
}

data::JointVector JointMap::joints_for(const Vec3d& p, const Vec3d& r) const {
  data::JointVector j;
  j.head<3>() = (p - origin).cwiseQuotient(gain);
  j.tail<3>() = r;
  return j;
}

bool JointMap::in_workspace(const Vec3d& p) const {
  return (p.array() >= workspace_min.array()).all() && (p.array() <= workspace_max.array()).all();
}

SceneObject* Scene::find(const std::string& id) {
  for (auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const SceneObject* Scene::find(const std::string& id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const SceneObject& Scene::at(const std::string& id) const {
  const auto* o = find(id);
  if (!o) throw Error("scene has no object '" + id + "'");
  return *o;
}

SceneObject& Scene::at(const std::string& id) {
  auto* o = find(id);
  if (!o) throw Error("scene has no object '" + id + "'");
  return *o;
}

bool same_state(const Scene& a, const Scene& b) {
  if (a.objects.size() != b.objects.size()) return false;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& x = a.arms[i];
    const auto& y = b.arms[i];
    if (x.joints != y.joints || x.gripper_width != y.gripper_width || x.suction_on != y.suction_on ||
        !(x.pressure == y.pressure) || !attachments_equal(x.attached, y.attached)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    const auto& x = a.objects[i];
    const auto& y = b.objects[i];
    if (x.id != y.id || !poses_equal(x.pose, y.pose) || x.resting_on != y.resting_on ||
        x.articulation.has_value() != y.articulation.has_value()) {
      return false;
    }
    if (x.articulation && x.articulation->value != y.articulation->value) return false;
  }
  return true;
}

Posed tool_pose(const Scene& s, Arm a) {
  return s.maps[static_cast<std::size_t>(index(a))].tool_pose(s.arm(a).joints);
}

std::array<CupPose<double>, 2> cup_poses(const Scene& s, Arm a) {
  const Posed T = tool_pose(s, a);
  const Vec3d jaw = T.linear().col(0);
  const Vec3d approach = -T.linear().col(2);
  const double offset = s.arm(a).gripper_width / 2.0 + s.params.cup_mount_offset;
  return {CupPose<double>{T.translation() - jaw * offset, approach},
          CupPose<double>{T.translation() + jaw * offset, approach}};
}

std::optional<Arm> holder_of(const Scene& s, const std::string& object_id) {
  for (Arm a : kArms) {
    const auto& att = s.arm(a).attached;
    if (att && att->object_id == object_id) return a;
  }
  return std::nullopt;
}

ArmCommand current_command(const Scene& s, Arm a) {
  const auto& st = s.arm(a);
  ArmCommand c;
  c << st.joints, st.gripper_width, st.suction_on ? 1.0 : 0.0;
  return c;
}

data::ActionVector current_action(const Scene& s) {
  return make_action(current_command(s, Arm::Left), current_command(s, Arm::Right));
}

ArmCommand arm_command(const data::ActionVector& a, Arm arm) {
  const int i = index(arm);
  ArmCommand c;
  c << a.values().segment<6>(6 * i), a[12 + i], a[14 + i];
  return c;
}

data::ActionVector make_action(const ArmCommand& left, const ArmCommand& right) {
  data::ActionArray v;
  v << left.head<6>(), right.head<6>(), left[6], right[6], left[7], right[7];
  return data::ActionVector(v);
}

std::array<data::ArmReading, 2> arm_readings(const Scene& s) {
  std::array<data::ArmReading, 2> r;
  for (Arm a : kArms) {
    const auto& st = s.arm(a);
    r[static_cast<std::size_t>(index(a))] = {st.joints, st.gripper_width, st.suction_on};
  }
  return r;
}

data::ProprioState observe(const Scene& s) { return data::proprio_from_sim(arm_readings(s)); }

void apply_proprio(Scene& s, const data::ProprioState& p) {
  for (Arm a : kArms) {
    s.arm(a).joints = p.joints(index(a));
    s.arm(a).gripper_width = p.width(index(a));
  }
}

std::optional<FacePatchd> leading_face(const SceneObject& o) {
  if (!o.articulation || o.articulation->kind != Articulation::Kind::Prismatic) return std::nullopt;
  const Vec3d a = world_axis(o);
  std::optional<FacePatchd> best;
  double best_dot = 0.5;
  for (int axis = 0; axis < 3; ++axis) {
    for (int sign : {-1, 1}) {
      const FacePatchd f = box_face<double>(o.half_extents, axis, sign).transformed(o.pose);
      const double d = f.normal.dot(a);
      if (d > best_dot) {
        best_dot = d;
        best = f;
      }
    }
  }
  return best;
}

double required_hold_force(const Scene& s, const SceneObject& obj) {
  if (obj.fixed) return std::numeric_limits<double>::infinity();
  if (obj.articulation) return obj.articulation->resist_force * s.params.safety_factor;
  return obj.mass * kGravity * s.params.safety_factor;
}

std::pair<double, std::optional<std::string>> support_below(const Scene& s, const SceneObject& obj) {
  double best = 0.0;
  std::optional<std::string> best_id;
  const double bottom = obj.bottom_z();
  const Vec3d center = obj.pose.translation();
  for (const auto& c : s.objects) {
    if (c.id == obj.id || holder_of(s, c.id) || is_descendant(s, c, obj.id)) continue;
    const Vec3d local = c.pose.inverse() * center;
    if (std::abs(local.x()) > c.half_extents.x() || std::abs(local.y()) > c.half_extents.y()) continue;
    const double z = (c.container && fits_inside(obj, c)) ? c.bottom_z() + c.floor_height : c.top_z();
    if (z <= bottom + 0.01 && z > best) {
      best = z;
      best_id = c.id;
    }
  }
  return {best, best_id};
}

bool is_supported(const Scene& s, const SceneObject& obj) {
  return std::abs(obj.bottom_z() - support_below(s, obj).first) < kSupportTolerance;
}

void move_with_children(Scene& s, const std::string& object_id, const Posed& new_pose) {
  SceneObject& obj = s.at(object_id);
  const Posed delta = new_pose * obj.pose.inverse();
  obj.pose = new_pose;
  for (auto& child : s.objects) {
    if (child.resting_on != object_id || holder_of(s, child.id)) continue;
    if (child.articulation) child.base_pose = delta * child.base_pose;
    move_with_children(s, child.id, delta * child.pose);
  }
}

void drop_to_support(Scene& s, const std::string& object_id) {
  SceneObject& obj = s.at(object_id);
  if (!obj.is_free()) return;
  const auto [z, support] = support_below(s, obj);
  Posed target = obj.pose;
  target.translation().z() += z - obj.bottom_z();
  move_with_children(s, object_id, target);
  s.at(object_id).resting_on = support;
}

bool inside(const Scene& s, const std::string& object_id, const std::string& container_id) {
  const SceneObject& o = s.at(object_id);
  const SceneObject& c = s.at(container_id);
  if (holder_of(s, object_id) || o.resting_on != container_id) return false;
  const Vec3d local = c.pose.inverse() * o.pose.translation();
  return std::abs(local.x()) <= c.half_extents.x() && std::abs(local.y()) <= c.half_extents.y();
}

AttachResult try_grasp(Scene& s, Arm a) {
  AttachResult r;
  auto& st = s.arm(a);
  if (st.attached) {
    r.reason = "arm already holds " + st.attached->object_id;
    return r;
  }
  const Posed tool = tool_pose(s, a);
  const Posed inv = tool.inverse();
  const double w = st.gripper_width;
  const double tol = s.params.grasp_tolerance;
  r.reason = "nothing between the jaws";
  for (auto& o : s.objects) {
    if (!o.is_free() || holder_of(s, o.id)) continue;
    const Vec3d p = inv * o.pose.translation();
    if (std::abs(p.x()) > w / 2.0 + tol || std::abs(p.y()) > kFingerHalfDepth ||
        std::abs(p.z()) > o.vertical_half_extent() + 0.01) {
      continue;
    }
    if (!o.graspable_width) {
      r.reason = o.id + " has no graspable width";
      continue;
    }
    const double gw = *o.graspable_width;
    if (gw > s.params.max_stroke) {
      r.reason = o.id + " is wider than the gripper stroke";
      continue;
    }
    if (gw < w - tol || gw > w + tol) {
      r.reason = "jaw opening does not match " + o.id;
      continue;
    }
    Attachment att;
    att.object_id = o.id;
    att.mode = AttachMode::Grasp;
    att.object_in_tool = inv * o.pose;
    st.attached = att;
    o.resting_on.reset();
    r.attached = true;
    r.object_id = o.id;
    r.reason.clear();
    s.events.push_back(std::string(to_string(a)) + " grasped " + o.id);
    return r;
  }
  return r;
}

AttachResult try_suction(Scene& s, Arm a, AttachMode mode) {
  AttachResult r;
  auto& st = s.arm(a);
  if (!is_suction(mode)) throw DomainError("try_suction needs a suction mode");
  if (!st.suction_on) {
    r.reason = "suction is off";
    return r;
  }
  if (st.attached) {
    r.reason = "arm already holds " + st.attached->object_id;
    return r;
  }
  const auto hit = cup_contacts(s, a);
  if (!hit[0] && !hit[1]) {
    r.reason = "no cup sealed";
    return r;
  }
  // Target the object with the most sealed cups; ties go to the first cup.
  std::size_t target = hit[0] ? *hit[0] : *hit[1];
  if (hit[0] && hit[1] && *hit[0] != *hit[1]) target = *hit[0];
  SceneObject& obj = s.objects[target];
  r.object_id = obj.id;
  for (std::size_t c = 0; c < 2; ++c) r.cup_sealed[c] = hit[c] && *hit[c] == target;

  PressureStated line;
  line.cups = contacts_from(s, hit);
  const double p_ss = steady_state_pressure(line, DeviceState::active(wire::Channel::Left), s.params.pneumatics);
  const int on_target = static_cast<int>(r.cup_sealed[0]) + static_cast<int>(r.cup_sealed[1]);
  r.steady_force = on_target * std::abs(p_ss) * 1000.0 * cup_area(s.params.pneumatics);
  r.required_force = required_hold_force(s, obj);
  if (obj.fixed) {
    r.reason = obj.id + " is fixed";
    return r;
  }
  if (r.steady_force < r.required_force) {
    r.reason = "steady-state suction force below the load of " + obj.id;
    return r;
  }
  const Posed tool = tool_pose(s, a);
  Attachment att;
  att.object_id = obj.id;
  att.mode = mode;
  att.object_in_tool = tool.inverse() * obj.pose;
  att.contact_local = obj.pose.inverse() * tool.translation();
  att.cup_sealed = r.cup_sealed;
  st.attached = att;
  if (obj.is_free()) obj.resting_on.reset();
  r.attached = true;
  s.events.push_back(std::string(to_string(a)) + " suctioned " + obj.id);
  return r;
}

namespace {

// Moves an articulated fixture so its contact point follows the tool.
// Returns false if the attachment has to break.
bool drive_articulation(Scene& s, Arm a, const Posed& tool, bool tool_moved) {
  auto& st = s.arm(a);
  SceneObject& obj = s.at(st.attached->object_id);
  Articulation& art = *obj.articulation;
  const Posed base_inv = obj.base_pose.inverse();
  const Vec3d target = base_inv * tool.translation();
  const Vec3d contact = art.joint_transform(art.value) * st.attached->contact_local;
  const Vec3d axis = art.axis.normalized();

  double next = art.value;
  if (art.kind == Articulation::Kind::Prismatic) {
    next += (target - contact).dot(axis);
  } else {
    const auto perp = [&](const Vec3d& v) { return Vec3d(v - axis * v.dot(axis)); };
    const Vec3d w0 = perp(contact - art.hinge);
    const Vec3d w1 = perp(target - art.hinge);
    next += std::atan2(axis.dot(w0.cross(w1)), w0.dot(w1));
  }
  next = std::clamp(next, art.lower, art.upper);

  if (next != art.value && is_suction(st.attached->mode) &&
      suction_force(st.pressure, s.params.pneumatics) < required_hold_force(s, obj)) {
    return false;
  }
  if (next != art.value) {
    art.value = next;
    move_with_children(s, obj.id, obj.base_pose * art.joint_transform(next));
  }
  const Vec3d contact_world = obj.pose * st.attached->contact_local;
  return !tool_moved || (contact_world - tool.translation()).norm() <= s.params.attach_break_distance;
}

void push_fixtures(Scene& s, const std::array<Posed, 2>& tools) {
  for (auto& o : s.objects) {
    if (!o.articulation || o.articulation->kind != Articulation::Kind::Prismatic || holder_of(s, o.id)) continue;
    const auto face = leading_face(o);
    if (!face) continue;
    for (Arm a : kArms) {
      const Vec3d tcp = tools[static_cast<std::size_t>(index(a))].translation();
      const double d = face->signed_distance(tcp);
      const Vec3d rel = tcp - face->center;
      if (d >= 0.0 || d < -kPushReach || std::abs(rel.dot(face->u)) > face->half_u + kPushLateralMargin ||
          std::abs(rel.dot(face->v)) > face->half_v + kPushLateralMargin) {
        continue;
      }
      Articulation& art = *o.articulation;
      const double along = face->normal.dot(world_axis(o).normalized());
      const double next = std::clamp(art.value + d / along, art.lower, art.upper);
      if (next < art.value) {
        art.value = next;
        move_with_children(s, o.id, o.base_pose * art.joint_transform(next));
        s.events.push_back(std::string(to_string(a)) + " pushed " + o.id);
      }
    }
  }
}

}  // namespace

Scene step_scene(Scene s, const ArmCommand& left_in, const ArmCommand& right_in, double dt) {
  s.events.clear();
  const std::array<ArmCommand, 2> cmd{sanitize(left_in, s.params), sanitize(right_in, s.params)};
  std::array<Posed, 2> old_tool;
  std::array<Posed, 2> new_tool;
  std::array<double, 2> old_width{};

  // Kinematics with speed and workspace limits, done in joint space so an
  // unclamped command lands exactly on the commanded joints.
  for (Arm a : kArms) {
    const auto i = static_cast<std::size_t>(index(a));
    auto& st = s.arms[i];
    const JointMap& map = s.maps[i];
    old_tool[i] = map.tool_pose(st.joints);
    old_width[i] = st.gripper_width;

    data::JointVector next = st.joints;
    const Vec3d dj = cmd[i].head<3>() - st.joints.head<3>();
    const double dist = map.gain.cwiseProduct(dj).norm();
    const double max_dist = s.params.max_speed * dt;
    if (dist <= max_dist) {
      next.head<3>() = cmd[i].head<3>();
    } else {
      next.head<3>() = st.joints.head<3>() + dj * (max_dist / dist);
    }
    const double max_rot = s.params.max_rot_speed * dt;
    for (int k = 3; k < 6; ++k) {
      const double d = cmd[i][k] - st.joints[k];
      next[k] = std::abs(d) <= max_rot ? cmd[i][k] : st.joints[k] + std::copysign(max_rot, d);
    }
    const Vec3d p = map.position(next);
    st.workspace_violation = !map.in_workspace(p);
    if (st.workspace_violation) {
      const Vec3d clamped = p.cwiseMax(map.workspace_min).cwiseMin(map.workspace_max);
      next.head<3>() = map.joints_for(clamped, Vec3d::Zero()).head<3>();
      s.events.push_back(std::string(to_string(a)) + " workspace violation");
    }
    st.joints = next;
    st.gripper_width = cmd[i][6];
    st.suction_on = cmd[i][7] != 0.0;
    new_tool[i] = map.tool_pose(st.joints);
  }

  // Actuators that let go release their objects where they are.
  for (Arm a : kArms) {
    auto& st = s.arm(a);
    if (!st.attached) continue;
    if (is_suction(st.attached->mode) && !st.suction_on) {
      release(s, a, "released");
    } else if (st.attached->mode == AttachMode::Grasp) {
      const auto& gw = s.at(st.attached->object_id).graspable_width;
      if (!gw || st.gripper_width > *gw + s.params.grasp_tolerance) release(s, a, "opened on");
    }
  }

  // Line pressure. Attached cups keep their recorded seal; free cups are
  // seal-checked against the world.
  for (Arm a : kArms) {
    auto& st = s.arm(a);
    if (st.attached && is_suction(st.attached->mode)) {
      const auto& mat = s.at(st.attached->object_id).material;
      for (std::size_t c = 0; c < 2; ++c) {
        st.pressure.cups[c] = st.attached->cup_sealed[c] ? CupContact{true, mat} : CupContact{};
      }
    } else {
      st.pressure.cups = contacts_from(s, cup_contacts(s, a));
    }
    const DeviceState dev = st.suction_on ? DeviceState::active(wire::Channel::Left)
                                          : DeviceState::idle(wire::Channel::Left);
    st.pressure = advance_pressure(st.pressure, dev, s.params.pneumatics, dt);
  }

  // Carry attached objects.
  for (Arm a : kArms) {
    const auto i = static_cast<std::size_t>(index(a));
    auto& st = s.arms[i];
    if (!st.attached) continue;
    const bool tool_moved = !poses_equal(old_tool[i], new_tool[i]);
    SceneObject& obj = s.at(st.attached->object_id);
    if (obj.is_free()) {
      const bool loaded = tool_moved || !is_supported(s, obj);
      if (is_suction(st.attached->mode) && loaded &&
          !holds_payload(st.pressure, obj.mass, s.params.pneumatics, s.params.safety_factor)) {
        release(s, a, "lost suction on");
        continue;
      }
      if (tool_moved) move_with_children(s, obj.id, new_tool[i] * st.attached->object_in_tool);
    } else if (!drive_articulation(s, a, new_tool[i], tool_moved)) {
      release(s, a, "lost hold on");
    }
  }

  push_fixtures(s, new_tool);

  for (Arm a : kArms) {
    const auto i = static_cast<std::size_t>(index(a));
    auto& st = s.arms[i];
    if (st.attached) continue;
    if (st.suction_on) {
      try_suction(s, a, st.gripper_width >= s.params.max_stroke / 2.0 ? AttachMode::SuctionWide
                                                                       : AttachMode::SuctionPoint);
    } else if (st.gripper_width < old_width[i]) {
      try_grasp(s, a);
    }
  }

  ++s.tick;
  s.time += dt;
  return s;
}

Scene step_scene(Scene s, const data::ActionVector& action) {
  const double dt = s.dt();
  return step_scene(std::move(s), arm_command(action, Arm::Left), arm_command(action, Arm::Right), dt);
}

}  // namespace vacgrip::sim

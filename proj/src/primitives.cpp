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

#include "vacgrip/primitives.hpp"

#include <cmath>
#include <sstream>

#include "vacgrip/errors.hpp"

namespace vacgrip::sim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void infeasible(const std::string& why) { throw PrimitiveInfeasible(why); }

/// Boxes look the same after a half turn, so headings only matter mod pi.
double wrap_half_turn(double a) {
  a = wrap_angle(a);
  if (a > kPi / 2) a -= kPi;
  if (a < -kPi / 2) a += kPi;
  return a;
}

Vec3d side_rpy(const Vec3d& normal) { return {0.0, -kPi / 2, std::atan2(-normal.y(), -normal.x())}; }

const SceneObject& target_object(const Scene& s, const std::string& id) {
  const auto* o = s.find(id);
  if (!o) infeasible("no object named '" + id + "' in the scene");
  return *o;
}

/// Accumulates one arm's motion as whole-robot actions; the other arm
/// repeats its current command.
class Builder {
 public:
  Builder(const Scene& s, Arm arm, const MotionLimits& lim)
      : s_(s), arm_(arm), i_(static_cast<std::size_t>(index(arm))), lim_(lim) {
    cmd_ = {current_command(s, Arm::Left), current_command(s, Arm::Right)};
  }

  const JointMap& map() const { return s_.maps[i_]; }
  Vec3d pos() const { return map().position(cmd_[i_].head<6>()); }
  Vec3d rpy() const { return map().rpy(cmd_[i_].head<6>()); }
  double width() const { return cmd_[i_][6]; }
  std::size_t size() const { return actions_.size(); }
  Mat3d rotation() const { return rotation_from_rpy<double>(rpy()); }

  void set_pose(const Vec3d& p, const Vec3d& r) {
    if (!map().in_workspace(p)) infeasible("motion leaves the workspace of the " + std::string(to_string(arm_)) + " arm");
    cmd_[i_].head<6>() = map().joints_for(p, r);
  }

  void emit() { actions_.push_back(make_action(cmd_[0], cmd_[1])); }

  void move_to(const Vec3d& p, const Vec3d& r, double speed) {
    const Vec3d p0 = pos();
    const Vec3d r0 = rpy();
    const double dist = (p - p0).norm();
    const double turn = (r - r0).cwiseAbs().maxCoeff();
    if (dist < 1e-12 && turn < 1e-12) return;
    const double duration = std::max(dist / speed, turn / lim_.rot_speed);
    const int n = std::max(1, static_cast<int>(std::ceil(duration * s_.params.rate_hz - 1e-9)));
    for (int k = 1; k <= n; ++k) {
      const double f = static_cast<double>(k) / n;
      set_pose(k == n ? p : Vec3d(p0 + (p - p0) * f), k == n ? r : Vec3d(r0 + (r - r0) * f));
      emit();
    }
  }
  void move_to(const Vec3d& p, const Vec3d& r) { move_to(p, r, lim_.linear_speed); }
  void move_to(const Vec3d& p) { move_to(p, rpy()); }

  void ascend() {
    const Vec3d p = pos();
    if (p.z() < lim_.travel_height) move_to(Vec3d(p.x(), p.y(), lim_.travel_height));
  }

  /// Up to travel height, then across (turning on the way) to above `p`.
  void go_above(const Vec3d& p, const Vec3d& r) {
    ascend();
    move_to(Vec3d(p.x(), p.y(), std::max(lim_.travel_height, pos().z())), r);
  }

  void set_width(double w) {
    if (cmd_[i_][6] == w) return;
    cmd_[i_][6] = w;
    emit();
  }

  void set_suction(bool on) {
    cmd_[i_][7] = on ? 1.0 : 0.0;
    emit();
  }

  void dwell(double seconds) {
    const int n = static_cast<int>(std::ceil(seconds * s_.params.rate_hz - 1e-9));
    for (int k = 0; k < n; ++k) emit();
  }

  Plan finish(std::string subtask) {
    Plan p;
    p.arm = arm_;
    p.actions = std::move(actions_);
    p.subtask = std::move(subtask);
    return p;
  }

 private:
  const Scene& s_;
  Arm arm_;
  std::size_t i_;
  MotionLimits lim_;
  std::array<ArmCommand, 2> cmd_;
  std::vector<data::ActionVector> actions_;
};

std::string arm_phrase(Arm a) { return "use the " + std::string(to_string(a)) + " arm to "; }

Plan plan_suction_pick(const Scene& s, Arm arm, const SuctionPick& p, const MotionLimits& lim) {
  if (!is_suction(p.mode)) infeasible("suction pick needs a suction mode");
  const SceneObject& o = target_object(s, p.target);
  if (holder_of(s, o.id)) infeasible(o.id + " is already held");
  if (s.arm(arm).attached) infeasible("the " + std::string(to_string(arm)) + " arm already holds an object");
  if (o.fixed) infeasible(o.id + " is fixed in place");
  if (!o.material.suctionable) infeasible(o.id + " is " + o.material.name + ", which does not take suction");
  const auto face = o.world_face(p.face);
  if (!face) infeasible(o.id + " has no suction face " + p.face);

  Vec3d rpy;
  const bool top = face->normal.z() > 0.7;
  if (top) {
    const Vec3d along = face->half_u >= face->half_v ? face->u : face->v;
    rpy = Vec3d(0.0, 0.0, wrap_half_turn(std::atan2(along.y(), along.x())));
  } else if (std::abs(face->normal.z()) < 0.3) {
    rpy = side_rpy(face->normal);
  } else {
    infeasible("suction face " + p.face + " of " + o.id + " is neither level nor upright");
  }

  // Check the cup layout and holding force before committing to the motion.
  const double width = p.mode == AttachMode::SuctionWide ? s.params.max_stroke : 0.0;
  const Mat3d R = rotation_from_rpy<double>(rpy);
  const double offset = width / 2.0 + s.params.cup_mount_offset;
  PressureStated line;
  int sealed = 0;
  for (int c = 0; c < 2; ++c) {
    const CupPose<double> cup{face->center + R.col(0) * (c == 0 ? -offset : offset), -R.col(2)};
    if (seal_check(cup, *face, o.material, s.params.seal)) {
      line.cups[static_cast<std::size_t>(c)] = CupContact{true, o.material};
      ++sealed;
    }
  }
  if (sealed == 0) infeasible("no cup fits on face " + p.face + " of " + o.id + " in " + std::string(to_string(p.mode)) + " mode");
  const double p_ss = steady_state_pressure(line, DeviceState::active(wire::Channel::Left), s.params.pneumatics);
  const double force = sealed * std::abs(p_ss) * 1000.0 * cup_area(s.params.pneumatics);
  if (force < required_hold_force(s, o)) infeasible("suction on " + o.id + " cannot hold its load");

  Builder b(s, arm, lim);
  if (top) {
    b.go_above(face->center, rpy);
    b.set_width(width);
    b.move_to(face->center);
  } else {
    const Vec3d pre = face->center + face->normal * lim.approach_offset;
    b.go_above(pre, rpy);
    b.set_width(width);
    b.move_to(pre);
    b.move_to(face->center);
  }
  b.set_suction(true);
  const std::size_t attach_at = b.size() - 1;
  b.dwell(lim.suction_dwell);
  if (o.is_free()) {
    if (!top) b.move_to(face->center + face->normal * lim.approach_offset);
    b.ascend();
  }
  Plan plan = b.finish(arm_phrase(arm) + "suction the " + o.label);
  plan.hold_object = o.id;
  plan.hold_from = attach_at;
  plan.hold_until = plan.actions.size();
  return plan;
}

Plan plan_grasp_pick(const Scene& s, Arm arm, const GraspPick& p, const MotionLimits& lim) {
  const SceneObject& o = target_object(s, p.target);
  if (!o.is_free()) infeasible(o.id + " is not a free object and cannot be gripped");
  if (holder_of(s, o.id)) infeasible(o.id + " is already held");
  if (s.arm(arm).attached) infeasible("the " + std::string(to_string(arm)) + " arm already holds an object");
  if (!o.graspable_width) infeasible(o.id + " offers no grasp");
  if (*o.graspable_width > s.params.max_stroke) infeasible(o.id + " is wider than the gripper stroke");

  const Vec3d across = o.half_extents.x() <= o.half_extents.y() ? Vec3d(o.pose.linear().col(0))
                                                                  : Vec3d(o.pose.linear().col(1));
  const Vec3d rpy(0.0, 0.0, wrap_half_turn(std::atan2(across.y(), across.x())));
  const Vec3d center = o.pose.translation();

  Builder b(s, arm, lim);
  b.go_above(center, rpy);
  b.set_width(s.params.max_stroke);
  b.move_to(center);
  b.set_width(*o.graspable_width);
  const std::size_t attach_at = b.size() - 1;
  b.dwell(lim.grip_dwell);
  b.ascend();
  Plan plan = b.finish(arm_phrase(arm) + "grasp the " + o.label);
  plan.hold_object = o.id;
  plan.hold_from = attach_at;
  plan.hold_until = plan.actions.size();
  return plan;
}

const Attachment& held(const Scene& s, Arm arm) {
  const auto& att = s.arm(arm).attached;
  if (!att) infeasible("the " + std::string(to_string(arm)) + " arm holds nothing");
  return *att;
}

/// Planned object pose for a Place, resting just above its support.
Posed place_target(const Scene& s, const SceneObject& o, const Place& p, const MotionLimits& lim) {
  Vec3d xy(p.x, p.y, 0.0);
  double yaw = p.yaw;
  if (p.onto) {
    const SceneObject& support = target_object(s, *p.onto);
    const Posed planar = make_pose<double>(support.pose.translation(), yaw_of(support.pose));
    xy = planar * xy;
    yaw += yaw_of(support.pose);
  }
  Posed target = o.pose;
  target.linear() = Eigen::AngleAxisd(wrap_half_turn(yaw - yaw_of(o.pose)), Vec3d::UnitZ()) * o.pose.linear();
  target.translation() = Vec3d(xy.x(), xy.y(), 10.0);

  Scene probe = s;
  SceneObject& moved = probe.at(o.id);
  moved.pose = target;
  const auto [z, support] = support_below(probe, moved);
  if (p.onto && support != p.onto) infeasible("the place target is not on " + *p.onto);
  target.translation().z() = z + moved.vertical_half_extent() + lim.place_clearance;
  return target;
}

Plan plan_place(const Scene& s, Arm arm, const Place& p, const MotionLimits& lim) {
  const Attachment& att = held(s, arm);
  const SceneObject& o = s.at(att.object_id);
  if (!o.is_free()) infeasible(o.id + " cannot be placed");
  const Posed obj_target = place_target(s, o, p, lim);
  const Posed tool_target = obj_target * att.object_in_tool.inverse();

  Builder b(s, arm, lim);
  const Vec3d rpy = rpy_near<double>(tool_target.linear(), b.rpy());
  b.go_above(tool_target.translation(), rpy);
  b.move_to(tool_target.translation());
  if (is_suction(att.mode)) {
    b.set_suction(false);
  } else {
    b.set_width(s.params.max_stroke);
  }
  const std::size_t release_at = b.size() - 1;
  b.dwell(lim.release_dwell);
  b.ascend();
  std::string text = arm_phrase(arm) + "place the " + o.label;
  if (p.onto) text += (s.at(*p.onto).container ? " into the " : " onto the ") + s.at(*p.onto).label;
  Plan plan = b.finish(text);
  plan.hold_object = o.id;
  plan.hold_from = 0;
  plan.hold_until = release_at;
  return plan;
}

Plan plan_push(const Scene& s, Arm arm, const Push& p, const MotionLimits& lim) {
  const SceneObject& o = target_object(s, p.target);
  if (!o.articulation || o.articulation->kind != Articulation::Kind::Prismatic) {
    infeasible(o.id + " is not a sliding fixture");
  }
  if (holder_of(s, o.id)) infeasible(o.id + " is held and cannot be pushed");
  const auto face = leading_face(o);
  if (!face || std::abs(face->normal.z()) > 0.3) infeasible(o.id + " has no upright face to push");
  const Articulation& art = *o.articulation;
  const double travel = art.value - art.lower;
  const bool close_fully = !p.distance || *p.distance >= travel;
  const double dist = close_fully ? travel + lim.push_overshoot : *p.distance;
  if (dist <= 0) infeasible("push distance must be positive");

  const Vec3d n = face->normal;
  const Vec3d pre = face->center + n * lim.approach_offset;
  const Vec3d end = face->center - n * dist;
  Builder b(s, arm, lim);
  b.go_above(pre, side_rpy(n));
  b.move_to(pre);
  b.move_to(end);
  b.move_to(end + n * lim.approach_offset);
  b.ascend();
  Plan plan = b.finish(arm_phrase(arm) + "push the " + o.label + (close_fully ? " closed" : ""));
  return plan;
}

Plan plan_pull(const Scene& s, Arm arm, const Pull& p, const MotionLimits& lim) {
  const Attachment& att = held(s, arm);
  const SceneObject& o = s.at(att.object_id);
  if (!is_suction(att.mode) || !o.articulation || o.articulation->kind != Articulation::Kind::Prismatic) {
    infeasible("pull needs a sliding fixture held by suction");
  }
  if (p.distance <= 0) infeasible("pull distance must be positive");
  const Articulation& art = *o.articulation;
  const double d = std::min(p.distance, art.upper - art.value);
  if (d <= 0) infeasible(o.id + " is already fully open");
  const Vec3d axis = (o.base_pose.linear() * art.axis).normalized();

  Builder b(s, arm, lim);
  const Vec3d end = b.pos() + axis * d;
  b.move_to(end);
  b.set_suction(false);
  const std::size_t release_at = b.size() - 1;
  b.dwell(lim.release_dwell);
  const Vec3d approach = -b.rotation().col(2);
  b.move_to(end - approach * lim.approach_offset);
  b.ascend();
  Plan plan = b.finish(arm_phrase(arm) + "pull the " + o.label + " open");
  plan.hold_object = o.id;
  plan.hold_until = release_at;
  return plan;
}

Plan plan_lift(const Scene& s, Arm arm, const Lift& p, const MotionLimits& lim) {
  const Attachment& att = held(s, arm);
  const SceneObject& o = s.at(att.object_id);
  if (!is_suction(att.mode) || !o.articulation || o.articulation->kind != Articulation::Kind::Revolute) {
    infeasible("lift needs a hinged fixture held by suction");
  }
  const Articulation& art = *o.articulation;
  if (p.angle < art.lower || p.angle > art.upper) infeasible("lift angle outside the hinge range");
  const double delta = p.angle - art.value;
  if (delta <= 0) infeasible(o.id + " is already open past the target angle");

  Builder b(s, arm, lim);
  const Posed tool_in_obj = o.pose.inverse() * tool_pose(s, arm);
  const double radius = (tool_in_obj.translation() - art.hinge).norm();
  const double duration = std::max(delta / lim.rot_speed, radius * delta / lim.linear_speed);
  const int n = std::max(1, static_cast<int>(std::ceil(duration * s.params.rate_hz - 1e-9)));
  for (int k = 1; k <= n; ++k) {
    const double angle = art.value + delta * static_cast<double>(k) / n;
    const Posed T = o.base_pose * art.joint_transform(angle) * tool_in_obj;
    b.set_pose(T.translation(), rpy_near<double>(T.linear(), b.rpy()));
    b.emit();
  }
  b.set_suction(false);
  const std::size_t release_at = b.size() - 1;
  b.dwell(lim.release_dwell);
  const Vec3d approach = -b.rotation().col(2);
  b.move_to(b.pos() - approach * lim.approach_offset);
  b.ascend();
  Plan plan = b.finish(arm_phrase(arm) + "lift the " + o.label);
  plan.hold_object = o.id;
  plan.hold_until = release_at;
  return plan;
}

Plan plan_press(const Scene& s, Arm arm, const Press& p, const MotionLimits& lim) {
  const SceneObject& o = target_object(s, p.target);
  if (holder_of(s, o.id)) infeasible(o.id + " is held and cannot be pressed");
  const Vec3d top(o.pose.translation().x(), o.pose.translation().y(), o.top_z());
  const Vec3d rpy(0.0, 0.0, wrap_half_turn(yaw_of(o.pose)));
  Builder b(s, arm, lim);
  b.go_above(top, rpy);
  b.move_to(top);
  b.dwell(lim.release_dwell);
  b.ascend();
  return b.finish(arm_phrase(arm) + "press the " + o.label);
}

Plan plan_hold(const Scene& s, Arm arm, const Hold& p, const MotionLimits& lim) {
  if (p.seconds < 0) infeasible("hold time must be non-negative");
  Builder b(s, arm, lim);
  b.dwell(p.seconds);
  return b.finish("hold still");
}

}  // namespace

std::string describe(const Primitive& p) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const SuctionPick& x) { os << "SuctionPick(" << x.target << ", " << to_string(x.mode) << ", " << x.face << ")"; },
                 [&](const GraspPick& x) { os << "GraspPick(" << x.target << ")"; },
                 [&](const Place& x) { os << "Place(" << x.onto.value_or("table") << ", " << x.x << ", " << x.y << ")"; },
                 [&](const Push& x) { os << "Push(" << x.target << ")"; },
                 [&](const Pull& x) { os << "Pull(" << x.distance << " m)"; },
                 [&](const Lift& x) { os << "Lift(" << x.angle * 180.0 / kPi << " deg)"; },
                 [&](const Press& x) { os << "Press(" << x.target << ")"; },
                 [&](const Hold& x) { os << "Hold(" << x.seconds << " s)"; },
             },
             p);
  return os.str();
}

Arm choose_arm(const Scene& s, const Primitive& p) {
  const auto by_side = [&](const std::string& id) {
    const auto* o = s.find(id);
    return (!o || o->pose.translation().y() >= 0.0) ? Arm::Left : Arm::Right;
  };
  const auto holder = [&] {
    for (Arm a : kArms) {
      if (s.arm(a).attached) return a;
    }
    return Arm::Left;
  };
  return std::visit(overloaded{
                        [&](const SuctionPick& x) { return by_side(x.target); },
                        [&](const GraspPick& x) { return by_side(x.target); },
                        [&](const Push& x) { return by_side(x.target); },
                        [&](const Press& x) { return by_side(x.target); },
                        [&](const Place&) { return holder(); },
                        [&](const Pull&) { return holder(); },
                        [&](const Lift&) { return holder(); },
                        [&](const Hold&) { return Arm::Left; },
                    },
                    p);
}

Plan plan_primitive(const Scene& s, Arm arm, const Primitive& p, const MotionLimits& lim) {
  return std::visit(overloaded{
                        [&](const SuctionPick& x) { return plan_suction_pick(s, arm, x, lim); },
                        [&](const GraspPick& x) { return plan_grasp_pick(s, arm, x, lim); },
                        [&](const Place& x) { return plan_place(s, arm, x, lim); },
                        [&](const Push& x) { return plan_push(s, arm, x, lim); },
                        [&](const Pull& x) { return plan_pull(s, arm, x, lim); },
                        [&](const Lift& x) { return plan_lift(s, arm, x, lim); },
                        [&](const Press& x) { return plan_press(s, arm, x, lim); },
                        [&](const Hold& x) { return plan_hold(s, arm, x, lim); },
                    },
                    p);
}

std::string check_postcondition(const Scene& before, const Scene& after, Arm arm, const Primitive& p) {
  const auto holds = [&](const std::string& id) { return holder_of(after, id) == arm; };
  return std::visit(
      overloaded{
          [&](const SuctionPick& x) -> std::string {
            const auto& att = after.arm(arm).attached;
            if (!att || att->object_id != x.target || !is_suction(att->mode)) return x.target + " was not suctioned";
            return {};
          },
          [&](const GraspPick& x) -> std::string { return holds(x.target) ? "" : x.target + " was not grasped"; },
          [&](const Place& x) -> std::string {
            const auto& att = before.arm(arm).attached;
            if (!att) return "nothing was held";
            if (holder_of(after, att->object_id)) return att->object_id + " is still held";
            const SceneObject& o = after.at(att->object_id);
            if (x.onto && o.resting_on != x.onto) return att->object_id + " did not land on " + *x.onto;
            if (x.onto && after.at(*x.onto).container && !inside(after, o.id, *x.onto)) {
              return att->object_id + " is not inside " + *x.onto;
            }
            return {};
          },
          [&](const Push& x) -> std::string {
            const auto& a0 = *before.at(x.target).articulation;
            const auto& a1 = *after.at(x.target).articulation;
            const double want = x.distance ? std::max(a0.lower, a0.value - *x.distance) : a0.lower;
            return a1.value <= want + 0.01 ? "" : x.target + " did not slide closed far enough";
          },
          [&](const Pull& x) -> std::string {
            const auto& att = before.arm(arm).attached;
            if (!att) return "nothing was held";
            const auto& a0 = *before.at(att->object_id).articulation;
            const auto& a1 = *after.at(att->object_id).articulation;
            const double want = std::min(a0.value + x.distance, a0.upper);
            return a1.value >= want - 0.01 ? "" : att->object_id + " did not open far enough";
          },
          [&](const Lift& x) -> std::string {
            const auto& att = before.arm(arm).attached;
            if (!att) return "nothing was held";
            return after.at(att->object_id).articulation->value >= x.angle - deg2rad(2.0)
                       ? ""
                       : att->object_id + " did not reach the lift angle";
          },
          [&](const Press& x) -> std::string {
            return is_supported(after, after.at(x.target)) ? "" : x.target + " is not resting on a support";
          },
          [&](const Hold&) -> std::string { return {}; },
      },
      p);
}

}  // namespace vacgrip::sim

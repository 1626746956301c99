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

#include "vacgrip/scene_io.hpp"

#include <array>
#include <fstream>

#include "vacgrip/builtin_scenes.hpp"
#include "vacgrip/errors.hpp"

namespace vacgrip::sim {

using nlohmann::json;

namespace {

Vec3d vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + " needs 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec_json(const Vec3d& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

SimParams parse_params(const json& j) {
  SimParams p;
  if (j.is_null()) return p;
  read_opt(j, "rate_hz", p.rate_hz);
  read_opt(j, "max_stroke", p.max_stroke);
  read_opt(j, "cup_mount_offset", p.cup_mount_offset);
  read_opt(j, "max_speed", p.max_speed);
  read_opt(j, "max_rot_speed", p.max_rot_speed);
  read_opt(j, "grasp_tolerance", p.grasp_tolerance);
  read_opt(j, "safety_factor", p.safety_factor);
  read_opt(j, "attach_break_distance", p.attach_break_distance);
  if (j.contains("seal")) {
    const json& s = j["seal"];
    if (s.contains("max_angle_deg")) p.seal.max_angle = deg2rad(s["max_angle_deg"].get<double>());
    read_opt(s, "max_angle", p.seal.max_angle);
    read_opt(s, "max_standoff", p.seal.max_standoff);
    read_opt(s, "cup_radius", p.seal.cup_radius);
  }
  if (j.contains("pneumatics")) {
    const json& n = j["pneumatics"];
    read_opt(n, "p_min", p.pneumatics.p_min);
    read_opt(n, "k_pump", p.pneumatics.k_pump);
    read_opt(n, "k_vent", p.pneumatics.k_vent);
    read_opt(n, "k_open_cup", p.pneumatics.k_open_cup);
    read_opt(n, "cup_diameter", p.pneumatics.cup_diameter);
    read_opt(n, "dt", p.pneumatics.dt);
  }
  if (p.rate_hz <= 0 || p.max_stroke <= 0 || p.max_speed <= 0 || p.max_rot_speed <= 0 || !p.pneumatics.valid()) {
    throw ConfigError("scene params out of range");
  }
  return p;
}

json params_json(const SimParams& p) {
  return json{{"rate_hz", p.rate_hz},
              {"max_stroke", p.max_stroke},
              {"cup_mount_offset", p.cup_mount_offset},
              {"max_speed", p.max_speed},
              {"max_rot_speed", p.max_rot_speed},
              {"grasp_tolerance", p.grasp_tolerance},
              {"safety_factor", p.safety_factor},
              {"attach_break_distance", p.attach_break_distance},
              {"seal", {{"max_angle", p.seal.max_angle},
                        {"max_standoff", p.seal.max_standoff},
                        {"cup_radius", p.seal.cup_radius}}},
              {"pneumatics", {{"p_min", p.pneumatics.p_min},
                              {"k_pump", p.pneumatics.k_pump},
                              {"k_vent", p.pneumatics.k_vent},
                              {"k_open_cup", p.pneumatics.k_open_cup},
                              {"cup_diameter", p.pneumatics.cup_diameter},
                              {"dt", p.pneumatics.dt}}}};
}

json material_json(const MaterialProfile& m) {
  return json{{"name", m.name}, {"leak_coeff", m.leak_coeff}, {"suctionable", m.suctionable}};
}

MaterialProfile material_from_json(const json& j) {
  return {j.at("name").get<std::string>(), j.at("leak_coeff").get<double>(), j.at("suctionable").get<bool>()};
}

// Authoring form: prismatic "range"/"value" in metres, revolute
// "range_deg"/"value_deg" in degrees.
Articulation parse_articulation(const json& j) {
  Articulation a;
  const auto type = j.at("type").get<std::string>();
  std::vector<double> range;
  double value = 0.0;
  if (type == "prismatic") {
    a.kind = Articulation::Kind::Prismatic;
    range = j.at("range").get<std::vector<double>>();
    read_opt(j, "value", value);
  } else if (type == "revolute") {
    a.kind = Articulation::Kind::Revolute;
    range = j.at("range_deg").get<std::vector<double>>();
    read_opt(j, "value_deg", value);
    for (double& r : range) r = deg2rad(r);
    value = deg2rad(value);
  } else {
    throw ConfigError("articulation type must be prismatic or revolute, got " + type);
  }
  if (range.size() != 2 || range[0] > range[1]) throw ConfigError("articulation range must be [lo, hi]");
  a.axis = vec3(j.at("axis"), "articulation axis");
  if (a.axis.norm() < 1e-9) throw ConfigError("articulation axis is zero");
  a.axis.normalize();
  if (j.contains("hinge")) a.hinge = vec3(j["hinge"], "articulation hinge");
  a.lower = range[0];
  a.upper = range[1];
  if (value < a.lower || value > a.upper) throw ConfigError("articulation value outside its range");
  a.value = value;
  read_opt(j, "resist_force", a.resist_force);
  if (a.resist_force < 0) throw ConfigError("resist_force must be non-negative");
  return a;
}

json articulation_json(const Articulation& a) {
  return json{{"kind", a.kind == Articulation::Kind::Prismatic ? "prismatic" : "revolute"},
              {"axis", vec_json(a.axis)},
              {"hinge", vec_json(a.hinge)},
              {"lower", a.lower},
              {"upper", a.upper},
              {"value", a.value},
              {"resist_force", a.resist_force}};
}

Articulation articulation_from_state(const json& j) {
  Articulation a;
  a.kind = j.at("kind").get<std::string>() == "prismatic" ? Articulation::Kind::Prismatic
                                                          : Articulation::Kind::Revolute;
  a.axis = vec3(j.at("axis"), "axis");
  a.hinge = vec3(j.at("hinge"), "hinge");
  a.lower = j.at("lower").get<double>();
  a.upper = j.at("upper").get<double>();
  a.value = j.at("value").get<double>();
  a.resist_force = j.at("resist_force").get<double>();
  return a;
}

double support_surface(const SceneObject& parent, const SceneObject& child) {
  if (parent.container) {
    // Same fit rule as support_below: the child's footprint inside the walls.
    const Posed to_p = parent.pose.inverse() * child.pose;
    bool fits = true;
    for (int sx : {-1, 1}) {
      for (int sy : {-1, 1}) {
        const Vec3d c = to_p * Vec3d(sx * child.half_extents.x(), sy * child.half_extents.y(), 0.0);
        fits = fits && std::abs(c.x()) <= parent.half_extents.x() - 0.005 &&
               std::abs(c.y()) <= parent.half_extents.y() - 0.005;
      }
    }
    if (fits) return parent.bottom_z() + parent.floor_height;
  }
  return parent.top_z();
}

SceneObject parse_object(const json& j, const Scene& s, const MaterialTable& materials) {
  SceneObject o;
  o.id = j.at("id").get<std::string>();
  if (o.id.empty()) throw ConfigError("object id must not be empty");
  if (s.find(o.id)) throw ConfigError("duplicate object id '" + o.id + "'");
  o.label = j.value("label", o.id);
  const Vec3d size = vec3(j.at("size"), "size");
  if ((size.array() <= 0).any()) throw ConfigError("object " + o.id + " needs positive size");
  o.half_extents = size / 2.0;
  read_opt(j, "mass", o.mass);
  if (o.mass <= 0) throw ConfigError("object " + o.id + " needs positive mass");
  o.material = materials.at(j.value("material", std::string("plastic")));
  if (j.contains("graspable_width") && !j["graspable_width"].is_null()) {
    o.graspable_width = j["graspable_width"].get<double>();
  }
  read_opt(j, "suction_faces", o.suction_faces);
  read_opt(j, "fixed", o.fixed);
  read_opt(j, "container", o.container);
  read_opt(j, "floor_height", o.floor_height);
  if (j.contains("resting_on") && !j["resting_on"].is_null()) o.resting_on = j["resting_on"].get<std::string>();
  if (j.contains("articulation")) o.articulation = parse_articulation(j["articulation"]);
  o.world_faces();  // validates the face tags

  const auto pos = j.at("position").get<std::vector<double>>();
  if (pos.size() != 2 && pos.size() != 3) throw ConfigError("object " + o.id + " position needs 2 or 3 numbers");
  const double yaw = deg2rad(j.value("yaw_deg", 0.0));
  Posed local = make_pose<double>(Vec3d(pos[0], pos[1], pos.size() == 3 ? pos[2] : 0.0), yaw);

  if (o.resting_on) {
    const SceneObject* parent = s.find(*o.resting_on);
    if (!parent) throw ConfigError("object " + o.id + " rests on unknown or later object " + *o.resting_on);
    Posed planar = make_pose<double>(parent->pose.translation(), yaw_of(parent->pose));
    o.pose = planar * local;
    if (pos.size() == 2) o.pose.translation().z() = support_surface(*parent, o) + o.vertical_half_extent();
  } else {
    o.pose = local;
    if (pos.size() == 2) o.pose.translation().z() = o.vertical_half_extent();
  }
  if (o.articulation) {
    o.base_pose = o.pose;
    o.pose = o.base_pose * o.articulation->joint_transform(o.articulation->value);
  }
  return o;
}

void parse_arm(const json& j, JointMap& map, ArmState& st) {
  if (j.contains("origin")) map.origin = vec3(j["origin"], "arm origin");
  if (j.contains("gain")) map.gain = vec3(j["gain"], "arm gain");
  if (j.contains("workspace_min")) map.workspace_min = vec3(j["workspace_min"], "workspace_min");
  if (j.contains("workspace_max")) map.workspace_max = vec3(j["workspace_max"], "workspace_max");
  if ((map.gain.array() == 0).any()) throw ConfigError("arm gain must be non-zero");
  const Vec3d position = j.contains("position") ? vec3(j["position"], "arm position") : Vec3d(0.3, 0.0, 0.3);
  const Vec3d rpy = j.contains("rpy") ? vec3(j["rpy"], "arm rpy") : Vec3d::Zero();
  if (!map.in_workspace(position)) throw ConfigError("arm start position outside its workspace");
  st.joints = map.joints_for(position, rpy);
  read_opt(j, "width", st.gripper_width);
}

json cup_json(const CupContact& c) {
  return json{{"sealed", c.sealed}, {"material", c.material ? material_json(*c.material) : json(nullptr)}};
}

CupContact cup_from_json(const json& j) {
  CupContact c;
  c.sealed = j.at("sealed").get<bool>();
  if (!j.at("material").is_null()) c.material = material_from_json(j["material"]);
  return c;
}

json joints_json(const data::JointVector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

json pose_json(const Posed& p) {
  json r = json::array();
  const Mat3d R = p.linear();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) r.push_back(R(i, k));
  }
  return json{{"p", vec_json(p.translation())}, {"R", r}};
}

Posed pose_from_json(const json& j) {
  const auto r = j.at("R").get<std::vector<double>>();
  if (r.size() != 9) throw ConfigError("pose rotation needs 9 numbers");
  Posed p = Posed::Identity();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) p.linear()(i, k) = r[static_cast<std::size_t>(3 * i + k)];
  }
  p.translation() = vec3(j.at("p"), "pose position");
  return p;
}

Scene parse_scene(const json& j, const MaterialTable& materials) {
  try {
    Scene s;
    s.name = j.value("name", std::string("scene"));
    s.task_id = j.value("task_id", 0);
    s.instruction = j.value("instruction", std::string());
    s.params = parse_params(j.value("params", json(nullptr)));
    // Default mounting: arms side by side, facing +x.
    s.maps[0].origin = Vec3d(0.0, 0.25, 0.0);
    s.maps[1].origin = Vec3d(0.0, -0.25, 0.0);
    const json arms = j.value("arms", json::object());
    for (Arm a : kArms) {
      const auto i = static_cast<std::size_t>(index(a));
      const std::string key(to_string(a));
      json spec = arms.value(key, json::object());
      if (!spec.contains("position")) {
        spec["position"] = vec_json(s.maps[i].origin + Vec3d(0.3, 0.0, 0.3));
      }
      parse_arm(spec, s.maps[i], s.arms[i]);
      if (s.arms[i].gripper_width < 0 || s.arms[i].gripper_width > s.params.max_stroke) {
        throw ConfigError("arm width outside [0, max_stroke]");
      }
    }
    for (const auto& oj : j.at("objects")) s.objects.push_back(parse_object(oj, s, materials));
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
}

Scene load_scene(const std::filesystem::path& path, const MaterialTable& materials) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("scene " + path.string() + ": " + e.what());
  }
  return parse_scene(j, materials);
}

const std::string& builtin_scene_text(int task_id) {
  static const std::array<std::string, 4> texts{kBuiltinScenes[0], kBuiltinScenes[1], kBuiltinScenes[2],
                                                kBuiltinScenes[3]};
  if (task_id < 1 || task_id > 4) throw ConfigError("no built-in scene for task " + std::to_string(task_id));
  return texts[static_cast<std::size_t>(task_id - 1)];
}

Scene builtin_scene(int task_id, const MaterialTable& materials) {
  return parse_scene(json::parse(builtin_scene_text(task_id)), materials);
}

Scene resolve_scene(const std::string& name_or_path, const MaterialTable& materials) {
  if (std::filesystem::exists(name_or_path)) return load_scene(name_or_path, materials);
  const auto name = std::filesystem::path(name_or_path).filename().string();
  for (int t = 1; t <= 4; ++t) {
    if (name == "task" + std::to_string(t) + ".scene" || name == "task" + std::to_string(t)) {
      return builtin_scene(t, materials);
    }
  }
  throw ConfigError("scene '" + name_or_path + "' is neither a file nor a built-in scene (task1..task4)");
}

json scene_state(const Scene& s) {
  json arms = json::array();
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& m = s.maps[i];
    const auto& st = s.arms[i];
    json att = nullptr;
    if (st.attached) {
      att = json{{"object_id", st.attached->object_id},
                 {"mode", std::string(to_string(st.attached->mode))},
                 {"object_in_tool", pose_json(st.attached->object_in_tool)},
                 {"contact_local", vec_json(st.attached->contact_local)},
                 {"cup_sealed", st.attached->cup_sealed}};
    }
    arms.push_back(json{{"origin", vec_json(m.origin)},
                        {"gain", vec_json(m.gain)},
                        {"workspace_min", vec_json(m.workspace_min)},
                        {"workspace_max", vec_json(m.workspace_max)},
                        {"joints", joints_json(st.joints)},
                        {"width", st.gripper_width},
                        {"suction", st.suction_on},
                        {"pressure", {{"gauge_kpa", st.pressure.gauge_kpa},
                                      {"cups", {cup_json(st.pressure.cups[0]), cup_json(st.pressure.cups[1])}}}},
                        {"attached", att}});
  }
  json objects = json::array();
  for (const auto& o : s.objects) {
    objects.push_back(json{{"id", o.id},
                           {"label", o.label},
                           {"half_extents", vec_json(o.half_extents)},
                           {"pose", pose_json(o.pose)},
                           {"mass", o.mass},
                           {"material", material_json(o.material)},
                           {"graspable_width", o.graspable_width ? json(*o.graspable_width) : json(nullptr)},
                           {"suction_faces", o.suction_faces},
                           {"articulation", o.articulation ? articulation_json(*o.articulation) : json(nullptr)},
                           {"base_pose", pose_json(o.base_pose)},
                           {"fixed", o.fixed},
                           {"container", o.container},
                           {"floor_height", o.floor_height},
                           {"resting_on", o.resting_on ? json(*o.resting_on) : json(nullptr)}});
  }
  return json{{"format", "vacgrip.scene-state"},
              {"task_id", s.task_id},
              {"name", s.name},
              {"instruction", s.instruction},
              {"time", s.time},
              {"tick", s.tick},
              {"params", params_json(s.params)},
              {"arms", arms},
              {"objects", objects}};
}

Scene scene_from_state(const json& j) {
  try {
    if (j.value("format", "") != "vacgrip.scene-state") throw ConfigError("not a scene state record");
    Scene s;
    s.task_id = j.at("task_id").get<int>();
    s.name = j.at("name").get<std::string>();
    s.instruction = j.at("instruction").get<std::string>();
    s.time = j.at("time").get<double>();
    s.tick = j.at("tick").get<std::uint64_t>();
    s.params = parse_params(j.at("params"));
    const json& arms = j.at("arms");
    if (arms.size() != 2) throw ConfigError("scene state needs two arms");
    for (std::size_t i = 0; i < 2; ++i) {
      const json& a = arms[i];
      auto& m = s.maps[i];
      auto& st = s.arms[i];
      m.origin = vec3(a.at("origin"), "origin");
      m.gain = vec3(a.at("gain"), "gain");
      m.workspace_min = vec3(a.at("workspace_min"), "workspace_min");
      m.workspace_max = vec3(a.at("workspace_max"), "workspace_max");
      const auto jv = a.at("joints").get<std::vector<double>>();
      if (jv.size() != 6) throw ConfigError("arm joints need 6 numbers");
      for (int k = 0; k < 6; ++k) st.joints[k] = jv[static_cast<std::size_t>(k)];
      st.gripper_width = a.at("width").get<double>();
      st.suction_on = a.at("suction").get<bool>();
      st.pressure.gauge_kpa = a.at("pressure").at("gauge_kpa").get<double>();
      for (std::size_t c = 0; c < 2; ++c) st.pressure.cups[c] = cup_from_json(a["pressure"]["cups"].at(c));
      if (!a.at("attached").is_null()) {
        const json& t = a["attached"];
        Attachment att;
        att.object_id = t.at("object_id").get<std::string>();
        const auto mode = t.at("mode").get<std::string>();
        att.mode = mode == "grasp" ? AttachMode::Grasp
                   : mode == "suction-wide" ? AttachMode::SuctionWide
                                            : AttachMode::SuctionPoint;
        att.object_in_tool = pose_from_json(t.at("object_in_tool"));
        att.contact_local = vec3(t.at("contact_local"), "contact_local");
        att.cup_sealed = t.at("cup_sealed").get<std::array<bool, 2>>();
        st.attached = att;
      }
    }
    for (const json& oj : j.at("objects")) {
      SceneObject o;
      o.id = oj.at("id").get<std::string>();
      o.label = oj.at("label").get<std::string>();
      o.half_extents = vec3(oj.at("half_extents"), "half_extents");
      o.pose = pose_from_json(oj.at("pose"));
      o.mass = oj.at("mass").get<double>();
      o.material = material_from_json(oj.at("material"));
      if (!oj.at("graspable_width").is_null()) o.graspable_width = oj["graspable_width"].get<double>();
      o.suction_faces = oj.at("suction_faces").get<std::vector<std::string>>();
      if (!oj.at("articulation").is_null()) o.articulation = articulation_from_state(oj["articulation"]);
      o.base_pose = pose_from_json(oj.at("base_pose"));
      o.fixed = oj.at("fixed").get<bool>();
      o.container = oj.at("container").get<bool>();
      o.floor_height = oj.at("floor_height").get<double>();
      if (!oj.at("resting_on").is_null()) o.resting_on = oj["resting_on"].get<std::string>();
      s.objects.push_back(std::move(o));
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scene state: ") + e.what());
  }
}

json snapshot_json(const Scene& s) {
  json arms = json::array();
  for (Arm a : kArms) {
    const auto& st = s.arm(a);
    const auto i = static_cast<std::size_t>(index(a));
    const Posed T = tool_pose(s, a);
    const auto cups = cup_poses(s, a);
    json cup_list = json::array();
    for (std::size_t c = 0; c < 2; ++c) {
      cup_list.push_back({{"position", vec_json(cups[c].position)}, {"sealed", st.pressure.cups[c].sealed}});
    }
    arms.push_back(json{{"arm", std::string(to_string(a))},
                        {"position", vec_json(T.translation())},
                        {"rpy", vec_json(s.maps[i].rpy(st.joints))},
                        {"gripper_width", st.gripper_width},
                        {"suction", st.suction_on},
                        {"pressure_kpa", st.pressure.gauge_kpa},
                        {"cups", cup_list},
                        {"attached", st.attached ? json(st.attached->object_id) : json(nullptr)},
                        {"workspace_violation", st.workspace_violation}});
  }
  json objects = json::array();
  for (const auto& o : s.objects) {
    json rec{{"id", o.id},
             {"label", o.label},
             {"position", vec_json(o.pose.translation())},
             {"yaw", yaw_of(o.pose)},
             {"size", vec_json(o.half_extents * 2.0)},
             {"material", o.material.name}};
    if (o.articulation) rec["articulation_value"] = o.articulation->value;
    objects.push_back(rec);
  }
  return json{{"task_id", s.task_id}, {"arms", arms}, {"objects", objects}};
}

}  // namespace vacgrip::sim

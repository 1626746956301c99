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
 * Scene files are JSON. The authoring form is meant to be edited by hand:
 *
 *   {"name": "drawer", "task_id": 3, "instruction": "...",
 *    "params": {"rate_hz": 30, "max_stroke": 0.07, ...},          optional
 *    "arms": {"left": {"origin": [0, 0.25, 0], "position": [...],
 *                      "rpy": [0, 0, 0], "width": 0.07}, "right": {...}},
 *    "objects": [{"id": "tray", "size": [0.44, 0.32, 0.03],
 *                 "position": [0.55, 0.0], "yaw_deg": 0, "mass": 0.3,
 *                 "material": "plastic", "graspable_width": 0.04,
 *                 "suction_faces": ["+z"], "fixed": false,
 *                 "container": true, "resting_on": "other-id",
 *                 "articulation": {"type": "prismatic", "axis": [-1, 0, 0],
 *                                  "range": [0, 0.25], "resist_force": 2}}]}
 *
 * A two-element position places the object on whatever supports it; with
 * "resting_on" set, position and yaw are relative to that support. The
 * state form (scene_state) stores every pose as a position plus a row-major
 * rotation matrix and round-trips exactly.
 */

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "vacgrip/scene.hpp"

namespace vacgrip::sim {

Scene parse_scene(const nlohmann::json& j, const MaterialTable& materials = MaterialTable::defaults());
Scene load_scene(const std::filesystem::path& path, const MaterialTable& materials = MaterialTable::defaults());

/// Built-in task scenes ("task1.scene" ... "task4.scene"), compiled in.
const std::string& builtin_scene_text(int task_id);
Scene builtin_scene(int task_id, const MaterialTable& materials = MaterialTable::defaults());

/// A path if the file exists, otherwise the name of a built-in scene.
Scene resolve_scene(const std::string& name_or_path, const MaterialTable& materials = MaterialTable::defaults());

nlohmann::json scene_state(const Scene& s);
Scene scene_from_state(const nlohmann::json& j);

/// Compact view for observers: poses, widths, suction, pressures. Carries
/// no clock, so a scene at rest gives identical snapshots.
nlohmann::json snapshot_json(const Scene& s);

nlohmann::json pose_json(const Posed& p);
Posed pose_from_json(const nlohmann::json& j);

}  // namespace vacgrip::sim

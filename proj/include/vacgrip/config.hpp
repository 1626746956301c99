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
 * Runtime settings. Defaults match each module's documented defaults; a JSON
 * file (path from --config or VACGRIP_CONFIG) overrides them and command-line
 * flags override the file.
 *
 *   {"pneumatics": {"p_min": -60, "k_pump": 5, ...},
 *    "materials": "config/materials.json",
 *    "scenes": {"1": "scenes/task1.scene"},
 *    "rate_hz": 30, "display_hz": 20, "port": 8080, "seed": 0,
 *    "trials": 15, "max_episode_s": 600, "episode_dir": "episodes",
 *    "static_dir": "ui/dist"}
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "vacgrip/pneumatics.hpp"
#include "vacgrip/scene.hpp"

namespace vacgrip {

struct Config {
  PneumaticParamsd pneumatics;
  std::string materials_path;           // empty: built-in table
  std::map<int, std::string> scenes;    // task id -> scene file override
  double rate_hz = 30.0;
  double display_hz = 20.0;
  int port = 8080;
  std::uint64_t seed = 0;
  int trials = 15;
  double max_episode_s = 600.0;
  std::string episode_dir = "episodes";
  std::string static_dir;

  MaterialTable materials() const;
  /// Scene for a task: the configured file if any, else the built-in one.
  sim::Scene task_scene(int task_id) const;
  /// Copies pneumatic parameters and the control rate into a scene.
  void apply(sim::Scene& s) const;
};

/// Throws ConfigError when the file is unreadable or holds a bad entry.
Config load_config(const std::string& path);

/// `explicit_path` if given, else $VACGRIP_CONFIG if set, else defaults.
Config resolve_config(const std::optional<std::string>& explicit_path = std::nullopt);

}  // namespace vacgrip

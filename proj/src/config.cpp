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

#include "vacgrip/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "vacgrip/errors.hpp"
#include "vacgrip/scene_io.hpp"

namespace vacgrip {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

MaterialTable Config::materials() const {
  return materials_path.empty() ? MaterialTable::defaults() : MaterialTable::load(materials_path);
}

sim::Scene Config::task_scene(int task_id) const {
  const auto it = scenes.find(task_id);
  sim::Scene s = it != scenes.end() ? sim::load_scene(it->second, materials()) : sim::builtin_scene(task_id, materials());
  apply(s);
  return s;
}

void Config::apply(sim::Scene& s) const {
  s.params.pneumatics = pneumatics;
  s.params.rate_hz = rate_hz;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config " + path + " must be a JSON object");
  reject_unknown(j,
                 {"pneumatics", "materials", "scenes", "rate_hz", "display_hz", "port", "seed", "trials",
                  "max_episode_s", "episode_dir", "static_dir"},
                 path);
  Config c;
  try {
    if (j.contains("pneumatics")) {
      const json& p = j["pneumatics"];
      reject_unknown(p, {"p_min", "k_pump", "k_vent", "k_open_cup", "cup_diameter", "dt"}, path + " pneumatics");
      c.pneumatics.p_min = p.value("p_min", c.pneumatics.p_min);
      c.pneumatics.k_pump = p.value("k_pump", c.pneumatics.k_pump);
      c.pneumatics.k_vent = p.value("k_vent", c.pneumatics.k_vent);
      c.pneumatics.k_open_cup = p.value("k_open_cup", c.pneumatics.k_open_cup);
      c.pneumatics.cup_diameter = p.value("cup_diameter", c.pneumatics.cup_diameter);
      c.pneumatics.dt = p.value("dt", c.pneumatics.dt);
    }
    c.materials_path = j.value("materials", c.materials_path);
    if (j.contains("scenes")) {
      for (const auto& [key, value] : j["scenes"].items()) c.scenes[std::stoi(key)] = value.get<std::string>();
    }
    c.rate_hz = j.value("rate_hz", c.rate_hz);
    c.display_hz = j.value("display_hz", c.display_hz);
    c.port = j.value("port", c.port);
    c.seed = j.value("seed", c.seed);
    c.trials = j.value("trials", c.trials);
    c.max_episode_s = j.value("max_episode_s", c.max_episode_s);
    c.episode_dir = j.value("episode_dir", c.episode_dir);
    c.static_dir = j.value("static_dir", c.static_dir);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("config " + path + ": scene keys must be task ids");
  }
  if (!c.pneumatics.valid() || c.pneumatics.dt > 0.01) throw ConfigError("config " + path + ": invalid pneumatics");
  if (c.rate_hz <= 0 || c.display_hz <= 0 || c.max_episode_s <= 0) throw ConfigError("config " + path + ": rates must be positive");
  if (c.port < 0 || c.port > 65535) throw ConfigError("config " + path + ": port out of range");
  if (c.trials < 1) throw ConfigError("config " + path + ": trials must be >= 1");
  if (!c.materials_path.empty()) c.materials();  // fail early on a bad table
  return c;
}

Config resolve_config(const std::optional<std::string>& explicit_path) {
  if (explicit_path) return load_config(*explicit_path);
  if (const char* env = std::getenv("VACGRIP_CONFIG"); env && *env) return load_config(env);
  return Config{};
}

}  // namespace vacgrip

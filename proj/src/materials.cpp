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

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "vacgrip/errors.hpp"
#include "vacgrip/pneumatics.hpp"

namespace vacgrip {

MaterialTable MaterialTable::defaults() {
  MaterialTable t;
  t.add({"glass", 0.0, true});
  t.add({"plastic", 0.5, true});
  t.add({"leather", 1.0, true});
  t.add({"cardboard", 5.0, true});
  // Props (banana, cucumber) are curved and textured; cups never seal on them.
  t.add({"prop", 15.0, false});
  return t;
}

MaterialTable MaterialTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open material table " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("material table " + path + ": " + e.what());
  }
  if (!doc.is_array()) throw ConfigError("material table must be an array of records");
  MaterialTable t;
  for (const auto& rec : doc) {
    try {
      MaterialProfile m{rec.at("name").get<std::string>(), rec.at("leak_coeff").get<double>(),
                        rec.at("suctionable").get<bool>()};
      if (m.leak_coeff < 0) throw ConfigError("material " + m.name + " has negative leak_coeff");
      t.add(std::move(m));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("material table " + path + ": " + e.what());
    }
  }
  return t;
}

void MaterialTable::add(MaterialProfile m) { by_name_[m.name] = std::move(m); }

const MaterialProfile& MaterialTable::at(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ConfigError("unknown material '" + name + "'");
  return it->second;
}

std::vector<MaterialProfile> MaterialTable::all() const {
  std::vector<MaterialProfile> out;
  for (const auto& [_, m] : by_name_) out.push_back(m);
  return out;
}

}  // namespace vacgrip

namespace vacgrip {

std::vector<TraceSample> phase_trace(const MaterialProfile& material, const PneumaticParamsd& params, double close_s,
                                     double open_s, double suction_s, double sample_dt) {
  if (!params.valid() || sample_dt <= 0 || close_s < 0 || open_s < 0 || suction_s < 0)
    throw RangeError("phase_trace needs valid parameters and non-negative durations");
  struct Phase {
    const char* name;
    double duration;
    bool cups_down;
    bool suction;
  };
  const Phase phases[] = {{"close", close_s, false, false}, {"open", open_s, true, false}, {"suction", suction_s, true, true}};

  std::vector<TraceSample> out;
  PressureStated ps;
  long k = 0;
  out.push_back({0.0, phases[0].name, ps.gauge_kpa, suction_force(ps, params)});
  for (const Phase& ph : phases) {
    const CupContact contact{ph.cups_down && material.suctionable, material};
    ps.cups = {contact, contact};
    const DeviceState dev = ph.suction ? DeviceState::active(wire::Channel::Left) : DeviceState::idle(wire::Channel::Left);
    const auto n = static_cast<long>(std::llround(ph.duration / sample_dt));
    for (long i = 0; i < n; ++i) {
      ps = advance_pressure(ps, dev, params, sample_dt);
      ++k;
      out.push_back({static_cast<double>(k) * sample_dt, ph.name, ps.gauge_kpa, suction_force(ps, params)});
    }
  }
  return out;
}

}  // namespace vacgrip

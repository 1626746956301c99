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

#include "vacgrip/rig.hpp"

#include "vacgrip/errors.hpp"
#include "vacgrip/scene_io.hpp"

namespace vacgrip::sim {

namespace {

wire::Channel channel_of(Arm a) { return a == Arm::Left ? wire::Channel::Left : wire::Channel::Right; }

}  // namespace

Rig::Rig(Scene initial, driver::DriverOptions opts) : scene_(std::move(initial)), opts_(opts) {
  for (Arm a : kArms) {
    const auto i = static_cast<std::size_t>(index(a));
    devices_[i] = std::make_unique<firmware::Device>(channel_of(a), [this, a] { return scene_.arm(a).pressure; });
    links_[i] = std::make_unique<firmware::LoopbackLink>(*devices_[i]);
    clients_[i] = std::make_unique<driver::SuctionClient>(channel_of(a), *links_[i], *links_[i], opts_);
    // Bring the controller in line with the scene's starting suction state.
    if (scene_.arm(a).suction_on) clients_[i]->set_suction(true);
  }
}

data::EpisodeStep Rig::step(const data::ActionVector& action, std::optional<std::string> subtask) {
  data::EpisodeStep rec;
  rec.t = scene_.time;
  rec.proprio = observe(scene_);
  rec.action = action;
  rec.pressure_kpa = {scene_.arm(Arm::Left).pressure.gauge_kpa, scene_.arm(Arm::Right).pressure.gauge_kpa};
  rec.subtask = std::move(subtask);

  for (Arm a : kArms) {
    auto& client = this->client(a);
    const bool want = action.suction(index(a));
    if (want != client.believed_on()) {
      client.set_suction(want);
    } else {
      client.tick();
      if (client.status().staleness >= opts_.query_period_ticks) client.poll_status();
    }
  }
  scene_ = step_scene(std::move(scene_), action);
  return rec;
}

data::EpisodeMeta episode_meta(const Scene& initial, const std::string& arm, std::uint64_t seed) {
  data::EpisodeMeta m;
  m.task_id = initial.task_id;
  m.instruction = initial.instruction;
  m.rate_hz = initial.params.rate_hz;
  m.arm = arm;
  m.seed = seed;
  m.initial_scene = scene_state(initial);
  return m;
}

ReplayReport replay_episode(const data::Episode& ep) {
  if (ep.meta.initial_scene.is_null()) throw Error("episode has no initial scene to replay from");
  Rig rig(scene_from_state(ep.meta.initial_scene));
  ReplayReport report;
  for (std::size_t i = 0; i < ep.steps.size(); ++i) {
    const auto rec = rig.step(ep.steps[i].action);
    if (!report.first_mismatch && rec.proprio.values() != ep.steps[i].proprio.values()) report.first_mismatch = i;
    ++report.steps;
  }
  report.final_scene = rig.scene();
  return report;
}

}  // namespace vacgrip::sim

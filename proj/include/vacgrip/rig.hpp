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
 * The simulated robot: a scene plus one emulated suction controller per arm,
 * reached through the real wire protocol and driver over in-process links.
 * Suction changes go through the driver and must be confirmed before the
 * scene steps; gripper widths go to the scene directly.
 */

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "vacgrip/action_data.hpp"
#include "vacgrip/driver.hpp"
#include "vacgrip/firmware.hpp"
#include "vacgrip/scene.hpp"

namespace vacgrip::sim {

class Rig {
 public:
  explicit Rig(Scene initial, driver::DriverOptions opts = {});
  Rig(const Rig&) = delete;
  Rig& operator=(const Rig&) = delete;

  const Scene& scene() const { return scene_; }

  /// Records the observation, forwards suction changes to the controllers,
  /// then advances the scene by one tick. The returned step holds the
  /// proprio and pressures seen before the action was applied.
  data::EpisodeStep step(const data::ActionVector& action, std::optional<std::string> subtask = std::nullopt);

  firmware::Device& device(Arm a) { return *devices_[static_cast<std::size_t>(index(a))]; }
  firmware::LoopbackLink& link(Arm a) { return *links_[static_cast<std::size_t>(index(a))]; }
  driver::SuctionClient& client(Arm a) { return *clients_[static_cast<std::size_t>(index(a))]; }

 private:
  Scene scene_;
  std::array<std::unique_ptr<firmware::Device>, 2> devices_;
  std::array<std::unique_ptr<firmware::LoopbackLink>, 2> links_;
  std::array<std::unique_ptr<driver::SuctionClient>, 2> clients_;
  driver::DriverOptions opts_;
};

/// Episode header for a recording that starts from `initial`.
data::EpisodeMeta episode_meta(const Scene& initial, const std::string& arm = "both", std::uint64_t seed = 0);

struct ReplayReport {
  std::size_t steps = 0;
  std::optional<std::size_t> first_mismatch;  // step whose proprio differs
  Scene final_scene;
};

/// Re-runs the recorded actions from the header's initial scene and compares
/// every recorded proprio vector bit for bit.
ReplayReport replay_episode(const data::Episode& ep);

}  // namespace vacgrip::sim

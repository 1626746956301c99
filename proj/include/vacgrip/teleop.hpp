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
 * Teleoperation session: one sim loop that a human drives with pose jogs,
 * gripper targets and a footswitch-style suction toggle, recording episodes
 * at a fixed rate independent of the input rate.
 *
 * Wire format (JSON, one record per message), client to server:
 *
 *   {"pose_delta": {"left": [dx, dy, dz, droll, dpitch, dyaw]},
 *    "gripper_width_target": {"right": 0.04},
 *    "suction_toggle_edge": {"right": true},
 *    "record_control": {"kind": "start", "task_id": 3, "instruction": "...", "arm": "right"}
 *                    | {"kind": "stop", "save": true}
 *                    | {"kind": "mark_subtask", "text": "..."}}
 *
 * Every field is optional. Server to client: acknowledgments
 * {"type": "ack", ...} and snapshots {"type": "snapshot", ...}.
 */

#include <array>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "vacgrip/rig.hpp"

namespace vacgrip::teleop {

using Vector6d = Eigen::Matrix<double, 6, 1>;

struct RecordControl {
  enum class Kind { Start, Stop, MarkSubtask };
  Kind kind = Kind::Start;
  int task_id = 0;
  std::string instruction;
  std::string arm = "both";  // arm designation stored in the episode header
  bool save = true;
  std::string text;
};

struct TeleopInput {
  std::array<std::optional<Vector6d>, 2> pose_delta;
  std::array<std::optional<double>, 2> gripper_width_target;
  std::array<bool, 2> suction_toggle_edge{false, false};
  std::optional<RecordControl> record_control;
};

/// Throws DomainError on malformed records.
TeleopInput input_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TeleopInput& in);

struct Ack {
  std::uint64_t seq = 0;
  bool rate_limited = false;  // over the input budget; coalesced into the next tick
  std::array<bool, 2> suction_confirmed{false, false};
  std::array<double, 2> pressure_kpa{0.0, 0.0};
  bool recording = false;
  std::size_t steps = 0;
  std::optional<std::string> saved_path;
  std::optional<std::string> error;
};
nlohmann::json to_json(const Ack& a);

struct SessionOptions {
  double display_hz = 20.0;
  double max_inputs_per_s = 120.0;
  double max_episode_s = 600.0;
  std::filesystem::path episode_dir = "episodes";
  std::size_t subscriber_queue = 8;
  /// Seconds on a monotonic clock; replaceable for tests.
  std::function<double()> clock;
};

/// Bounded snapshot queue for one observer. A full queue drops its oldest
/// frame, so a slow reader never stalls the sim loop.
class Subscriber {
 public:
  explicit Subscriber(std::size_t capacity) : capacity_(capacity) {}
  void push(std::string frame);
  /// Next frame, waiting up to `timeout`.
  std::optional<std::string> pop(std::chrono::milliseconds timeout = std::chrono::milliseconds(0));
  std::size_t dropped() const;
  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> frames_;
  std::size_t capacity_;
  std::size_t dropped_ = 0;
  bool closed_ = false;
};

class Session {
 public:
  Session(std::string id, sim::Scene initial, SessionOptions opts = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }

  /// Merges jogs and width targets into the next tick, forwards each toggle
  /// edge to the controller right away (in order) and handles recording
  /// control. Throws SessionClosed after close().
  Ack apply_input(const TeleopInput& in);

  /// One sim step at the collection rate; appends a step while recording.
  void tick();
  /// Runs tick() at the scene rate on a background thread until stop().
  void start();
  void stop();
  void close();
  bool closed() const;

  std::shared_ptr<Subscriber> subscribe();
  void unsubscribe(const std::shared_ptr<Subscriber>& s);
  std::size_t subscriber_count() const;

  nlohmann::json snapshot() const;
  sim::Scene scene() const;
  bool recording() const;
  std::size_t recorded_steps() const;
  /// Saved episodes per task and the collection goal for each.
  std::map<int, std::pair<int, int>> progress() const;
  /// Suction toggle edges applied so far, in order ("left on", ...).
  std::vector<std::string> toggle_log() const;

 private:
  void record_locked(const data::EpisodeStep& step);
  Ack control_locked(const RecordControl& rc, Ack ack);
  nlohmann::json snapshot_locked() const;
  void publish_locked();

  std::string id_;
  SessionOptions opts_;
  mutable std::mutex mu_;
  std::unique_ptr<sim::Rig> rig_;
  std::array<Vector6d, 2> pending_delta_{Vector6d::Zero(), Vector6d::Zero()};
  std::array<std::optional<double>, 2> pending_width_;
  std::deque<double> input_times_;
  std::uint64_t seq_ = 0;
  bool closed_ = false;

  std::optional<data::Episode> episode_;
  std::optional<std::string> subtask_;
  std::size_t max_steps_ = 0;
  bool overflowed_ = false;
  std::map<int, int> saved_;
  std::vector<std::string> toggles_;

  std::vector<std::shared_ptr<Subscriber>> subscribers_;
  std::uint64_t ticks_ = 0;
  std::uint64_t frames_ = 0;

  std::thread loop_;
  bool running_ = false;
  std::condition_variable stop_cv_;
};

}  // namespace vacgrip::teleop

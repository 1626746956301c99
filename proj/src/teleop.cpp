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

#include "vacgrip/teleop.hpp"

#include <cmath>
#include <cstdio>
#include <regex>

#include "vacgrip/episode_io.hpp"
#include "vacgrip/errors.hpp"
#include "vacgrip/harness.hpp"
#include "vacgrip/scene_io.hpp"

namespace vacgrip::teleop {

using nlohmann::json;
using sim::Arm;
using sim::kArms;

namespace {

constexpr const char* kArmKeys[2] = {"left", "right"};

double steady_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

const json* arm_field(const json& obj, std::size_t i, const char* field) {
  if (!obj.is_object()) throw DomainError(std::string(field) + " must be an object keyed by arm");
  for (const auto& [key, _] : obj.items()) {
    if (key != "left" && key != "right") throw DomainError(std::string(field) + ": unknown arm '" + key + "'");
  }
  const auto it = obj.find(kArmKeys[i]);
  return it == obj.end() ? nullptr : &*it;
}

double finite_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw DomainError(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw DomainError(what + " must be finite");
  return x;
}

int episodes_on_disk(const std::filesystem::path& dir, int task_id) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return 0;
  const std::regex name("task" + std::to_string(task_id) + "_[0-9]+\\.ep");
  int n = 0;
  for (const auto& p : data::list_episodes(dir)) {
    if (std::regex_match(p.filename().string(), name)) ++n;
  }
  return n;
}

std::filesystem::path next_episode_path(const std::filesystem::path& dir, int task_id) {
  for (int i = 0;; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "task%d_%04d.ep", task_id, i);
    auto p = dir / name;
    if (!std::filesystem::exists(p)) return p;
  }
}

}  // namespace

TeleopInput input_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("teleop input must be a JSON object");
  TeleopInput in;
  for (const auto& [key, _] : j.items()) {
    if (key != "pose_delta" && key != "gripper_width_target" && key != "suction_toggle_edge" &&
        key != "record_control")
      throw DomainError("unknown teleop field '" + key + "'");
  }
  for (std::size_t i = 0; i < 2; ++i) {
    if (j.contains("pose_delta")) {
      if (const json* d = arm_field(j["pose_delta"], i, "pose_delta")) {
        if (!d->is_array() || d->size() != 6) throw DomainError("pose_delta needs 6 values");
        Vector6d v;
        for (int k = 0; k < 6; ++k) v[k] = finite_number((*d)[static_cast<std::size_t>(k)], "pose_delta entry");
        in.pose_delta[i] = v;
      }
    }
    if (j.contains("gripper_width_target")) {
      if (const json* w = arm_field(j["gripper_width_target"], i, "gripper_width_target")) {
        const double x = finite_number(*w, "gripper_width_target");
        if (x < 0) throw DomainError("gripper_width_target must be non-negative");
        in.gripper_width_target[i] = x;
      }
    }
    if (j.contains("suction_toggle_edge")) {
      if (const json* e = arm_field(j["suction_toggle_edge"], i, "suction_toggle_edge")) {
        if (!e->is_boolean()) throw DomainError("suction_toggle_edge must be a boolean");
        in.suction_toggle_edge[i] = e->get<bool>();
      }
    }
  }
  if (j.contains("record_control")) {
    const json& r = j["record_control"];
    if (!r.is_object() || !r.contains("kind") || !r["kind"].is_string())
      throw DomainError("record_control needs a kind");
    RecordControl rc;
    const auto kind = r["kind"].get<std::string>();
    try {
      if (kind == "start") {
        rc.kind = RecordControl::Kind::Start;
        rc.task_id = r.value("task_id", 0);
        rc.instruction = r.value("instruction", std::string{});
        rc.arm = r.value("arm", std::string("both"));
        if (rc.arm != "left" && rc.arm != "right" && rc.arm != "both")
          throw DomainError("record_control arm must be left, right or both");
      } else if (kind == "stop") {
        rc.kind = RecordControl::Kind::Stop;
        rc.save = r.value("save", true);
      } else if (kind == "mark_subtask") {
        rc.kind = RecordControl::Kind::MarkSubtask;
        rc.text = r.value("text", std::string{});
      } else {
        throw DomainError("unknown record_control kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw DomainError(std::string("record_control: ") + e.what());
    }
    in.record_control = rc;
  }
  return in;
}

json to_json(const TeleopInput& in) {
  json j = json::object();
  for (std::size_t i = 0; i < 2; ++i) {
    if (in.pose_delta[i]) {
      const auto& d = *in.pose_delta[i];
      j["pose_delta"][kArmKeys[i]] = std::vector<double>(d.data(), d.data() + 6);
    }
    if (in.gripper_width_target[i]) j["gripper_width_target"][kArmKeys[i]] = *in.gripper_width_target[i];
    if (in.suction_toggle_edge[i]) j["suction_toggle_edge"][kArmKeys[i]] = true;
  }
  if (const auto& rc = in.record_control) {
    switch (rc->kind) {
      case RecordControl::Kind::Start:
        j["record_control"] = {{"kind", "start"}, {"task_id", rc->task_id}, {"instruction", rc->instruction}, {"arm", rc->arm}};
        break;
      case RecordControl::Kind::Stop:
        j["record_control"] = {{"kind", "stop"}, {"save", rc->save}};
        break;
      case RecordControl::Kind::MarkSubtask:
        j["record_control"] = {{"kind", "mark_subtask"}, {"text", rc->text}};
        break;
    }
  }
  return j;
}

json to_json(const Ack& a) {
  json j = {{"type", "ack"},
            {"seq", a.seq},
            {"rate_limited", a.rate_limited},
            {"suction", {{"left", a.suction_confirmed[0]}, {"right", a.suction_confirmed[1]}}},
            {"pressure_kpa", {{"left", a.pressure_kpa[0]}, {"right", a.pressure_kpa[1]}}},
            {"recording", a.recording},
            {"steps", a.steps}};
  if (a.saved_path) j["saved_path"] = *a.saved_path;
  if (a.error) j["error"] = *a.error;
  return j;
}

// ---------------------------------------------------------------------------

void Subscriber::push(std::string frame) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (frames_.size() >= capacity_) {
      frames_.pop_front();
      ++dropped_;
    }
    frames_.push_back(std::move(frame));
  }
  cv_.notify_one();
}

std::optional<std::string> Subscriber::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [this] { return !frames_.empty() || closed_; });
  if (frames_.empty()) return std::nullopt;
  auto f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

std::size_t Subscriber::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

void Subscriber::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscriber::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

// ---------------------------------------------------------------------------

Session::Session(std::string id, sim::Scene initial, SessionOptions opts)
    : id_(std::move(id)), opts_(std::move(opts)), rig_(std::make_unique<sim::Rig>(std::move(initial))) {
  if (!opts_.clock) opts_.clock = steady_seconds;
  if (opts_.display_hz <= 0 || opts_.max_inputs_per_s <= 0 || opts_.max_episode_s <= 0)
    throw RangeError("session rates must be positive");
  if (opts_.subscriber_queue == 0) throw RangeError("subscriber queue must hold at least one frame");
  max_steps_ = static_cast<std::size_t>(std::llround(opts_.max_episode_s * rig_->scene().params.rate_hz));
  for (int task = 1; task <= 4; ++task) saved_[task] = episodes_on_disk(opts_.episode_dir, task);
}

Session::~Session() { stop(); }

Ack Session::apply_input(const TeleopInput& in) {
  std::lock_guard lock(mu_);
  if (closed_) throw SessionClosed("session " + id_ + " is closed");
  Ack ack;
  ack.seq = ++seq_;

  const double now = opts_.clock();
  while (!input_times_.empty() && input_times_.front() <= now - 1.0) input_times_.pop_front();
  ack.rate_limited = static_cast<double>(input_times_.size()) >= opts_.max_inputs_per_s;
  input_times_.push_back(now);

  // Jogs accumulate until the next tick, so inputs beyond the budget are
  // coalesced rather than dropped; the ack only reports it.
  for (std::size_t i = 0; i < 2; ++i) {
    if (in.pose_delta[i]) pending_delta_[i] += *in.pose_delta[i];
    if (in.gripper_width_target[i]) pending_width_[i] = *in.gripper_width_target[i];
  }

  for (Arm a : kArms) {
    const auto i = static_cast<std::size_t>(index(a));
    if (!in.suction_toggle_edge[i]) continue;
    auto& client = rig_->client(a);
    const bool want = !client.believed_on();
    try {
      client.set_suction(want);
      toggles_.push_back(std::string(sim::to_string(a)) + (want ? " on" : " off"));
    } catch (const Error& e) {
      ack.error = std::string(sim::to_string(a)) + " suction: " + e.what();
    }
  }

  if (in.record_control) ack = control_locked(*in.record_control, ack);

  for (Arm a : kArms) {
    const auto i = static_cast<std::size_t>(index(a));
    ack.suction_confirmed[i] = rig_->client(a).believed_on();
    ack.pressure_kpa[i] = rig_->client(a).status().pressure_kpa;
  }
  ack.recording = episode_.has_value();
  ack.steps = episode_ ? episode_->steps.size() : 0;
  if (!ack.error && overflowed_) ack.error = "episode buffer full; stop to save";
  return ack;
}

Ack Session::control_locked(const RecordControl& rc, Ack ack) {
  switch (rc.kind) {
    case RecordControl::Kind::Start: {
      if (episode_) {
        ack.error = "already recording";
        break;
      }
      data::Episode ep;
      ep.meta = sim::episode_meta(rig_->scene(), rc.arm);
      if (rc.task_id != 0) ep.meta.task_id = rc.task_id;
      if (!rc.instruction.empty()) ep.meta.instruction = rc.instruction;
      episode_ = std::move(ep);
      subtask_.reset();
      overflowed_ = false;
      break;
    }
    case RecordControl::Kind::Stop: {
      if (!episode_) {
        ack.error = "not recording";
        break;
      }
      data::Episode ep = std::move(*episode_);
      episode_.reset();
      subtask_.reset();
      overflowed_ = false;
      if (!rc.save) break;
      try {
        if (ep.steps.empty()) throw EmptyEpisode("episode has no steps");
        data::validate_episode(ep);
        std::filesystem::create_directories(opts_.episode_dir);
        const auto path = next_episode_path(opts_.episode_dir, ep.meta.task_id);
        data::write_episode(path, ep);
        ++saved_[ep.meta.task_id];
        ack.saved_path = path.string();
      } catch (const Error& e) {
        ack.error = std::string("not saved: ") + e.what();
      } catch (const std::filesystem::filesystem_error& e) {
        ack.error = std::string("not saved: ") + e.what();
      }
      break;
    }
    case RecordControl::Kind::MarkSubtask:
      if (!episode_) {
        ack.error = "not recording";
        break;
      }
      subtask_ = rc.text;
      break;
  }
  return ack;
}

void Session::record_locked(const data::EpisodeStep& step) {
  if (episode_->steps.size() >= max_steps_) {
    overflowed_ = true;
    throw BufferOverflow("episode reached " + std::to_string(max_steps_) + " steps");
  }
  episode_->steps.push_back(step);
}

void Session::tick() {
  std::lock_guard lock(mu_);
  if (closed_) return;
  const sim::Scene& s = rig_->scene();
  const double dt = s.dt();
  std::array<sim::ArmCommand, 2> cmd;
  for (Arm a : kArms) {
    const auto i = static_cast<std::size_t>(index(a));
    const auto& map = s.maps[i];
    const auto& joints = s.arm(a).joints;
    Vec3d dp = pending_delta_[i].head<3>();
    const double max_step = s.params.max_speed * dt;
    if (dp.norm() > max_step) dp *= max_step / dp.norm();
    const Vec3d drpy =
        pending_delta_[i].tail<3>().cwiseMax(-s.params.max_rot_speed * dt).cwiseMin(s.params.max_rot_speed * dt);
    cmd[i] = sim::current_command(s, a);
    cmd[i].head<6>() = map.joints_for(map.position(joints) + dp, map.rpy(joints) + drpy);
    if (pending_width_[i]) cmd[i][6] = std::clamp(*pending_width_[i], 0.0, s.params.max_stroke);
    cmd[i][7] = rig_->client(a).believed_on() ? 1.0 : 0.0;
    pending_delta_[i].setZero();
  }
  const auto action = sim::make_action(cmd[0], cmd[1]);
  auto rec = rig_->step(action, episode_ ? subtask_ : std::nullopt);
  if (episode_ && !overflowed_) {
    try {
      record_locked(rec);
    } catch (const BufferOverflow&) {
      // Reported in acks and snapshots until the operator stops.
    }
  }
  ++ticks_;
  const double rate = rig_->scene().params.rate_hz;
  if (static_cast<double>(ticks_) * opts_.display_hz >= static_cast<double>(frames_) * rate) {
    ++frames_;
    publish_locked();
  }
}

void Session::start() {
  std::lock_guard lock(mu_);
  if (closed_) throw SessionClosed("session " + id_ + " is closed");
  if (running_) return;
  running_ = true;
  const double rate = rig_->scene().params.rate_hz;
  loop_ = std::thread([this, rate] {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / rate));
    auto next = clock::now();
    std::unique_lock lk(mu_);
    while (running_) {
      lk.unlock();
      tick();
      next += period;
      lk.lock();
      stop_cv_.wait_until(lk, next, [this] { return !running_; });
    }
  });
}

void Session::stop() {
  {
    std::lock_guard lock(mu_);
    running_ = false;
  }
  stop_cv_.notify_all();
  if (loop_.joinable()) loop_.join();
}

void Session::close() {
  stop();
  std::vector<std::shared_ptr<Subscriber>> subs;
  {
    std::lock_guard lock(mu_);
    closed_ = true;
    episode_.reset();
    subs.swap(subscribers_);
  }
  for (auto& s : subs) s->close();
}

bool Session::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::shared_ptr<Subscriber> Session::subscribe() {
  std::lock_guard lock(mu_);
  if (closed_) throw SessionClosed("session " + id_ + " is closed");
  auto s = std::make_shared<Subscriber>(opts_.subscriber_queue);
  s->push(snapshot_locked().dump());
  subscribers_.push_back(s);
  return s;
}

void Session::unsubscribe(const std::shared_ptr<Subscriber>& s) {
  std::lock_guard lock(mu_);
  std::erase(subscribers_, s);
  s->close();
}

std::size_t Session::subscriber_count() const {
  std::lock_guard lock(mu_);
  return subscribers_.size();
}

json Session::snapshot_locked() const {
  json j = sim::snapshot_json(rig_->scene());
  j["type"] = "snapshot";
  j["session"] = id_;
  j["recording"] = episode_.has_value();
  j["steps"] = episode_ ? episode_->steps.size() : 0;
  j["buffer_full"] = overflowed_;
  if (subtask_) j["subtask"] = *subtask_;
  json progress = json::object();
  for (const auto& [task, n] : saved_) {
    progress[std::to_string(task)] = {{"saved", n}, {"goal", harness::collection_goal(task)}};
  }
  j["progress"] = progress;
  return j;
}

void Session::publish_locked() {
  const std::string frame = snapshot_locked().dump();
  for (auto& s : subscribers_) s->push(frame);
}

json Session::snapshot() const {
  std::lock_guard lock(mu_);
  return snapshot_locked();
}

sim::Scene Session::scene() const {
  std::lock_guard lock(mu_);
  return rig_->scene();
}

bool Session::recording() const {
  std::lock_guard lock(mu_);
  return episode_.has_value();
}

std::size_t Session::recorded_steps() const {
  std::lock_guard lock(mu_);
  return episode_ ? episode_->steps.size() : 0;
}

std::map<int, std::pair<int, int>> Session::progress() const {
  std::lock_guard lock(mu_);
  std::map<int, std::pair<int, int>> out;
  for (const auto& [task, n] : saved_) out[task] = {n, harness::collection_goal(task)};
  return out;
}

std::vector<std::string> Session::toggle_log() const {
  std::lock_guard lock(mu_);
  return toggles_;
}

}  // namespace vacgrip::teleop

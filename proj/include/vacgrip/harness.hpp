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
 * The four evaluation tasks, their goal predicates and the trial protocol:
 * a trial succeeds only if every prime action completes and every goal holds
 * at its checkpoint. A trial also fails when both arms stay put for a full
 * minute (the oscillation rule).
 */

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vacgrip/primitives.hpp"
#include "vacgrip/rig.hpp"

namespace vacgrip::harness {

enum class FailureCause { None, PredicateUnmet, Oscillation, PrimitiveInfeasible, AttachmentLost };
std::string_view to_string(FailureCause c);

enum class PolicyKind {
  ScriptedHybrid,  // suction where the target takes it, gripping otherwise
  GraspOnly,       // suction disabled: every pick is a grasp
  Frozen,          // never moves
};
std::string_view to_string(PolicyKind p);
PolicyKind policy_from_string(std::string_view s);

/// A pick whose effector is chosen by the policy at run time.
struct Pick {
  std::string target;
  sim::AttachMode suction_mode = sim::AttachMode::SuctionWide;
  std::string face = "+z";
};

using TaskStep = std::variant<Pick, sim::Place, sim::Push, sim::Pull, sim::Lift, sim::Press>;

struct Goal {
  std::string name;
  std::size_t after_step = 0;  // checked once this task step has finished
  std::function<bool(const sim::Scene&)> holds;
};

struct Jitter {
  double position = 0.02;  // m, uniform in [-position, position] per axis
  double yaw_deg = 5.0;
};

struct TaskSpec {
  int id = 0;
  std::string name;
  sim::Scene scene;
  std::vector<TaskStep> steps;
  std::vector<Goal> goals;
  int trials = 15;
  Jitter jitter;
};

/// Task 1..4 on its built-in scene, or on a caller-supplied scene with the
/// same object ids.
TaskSpec task_spec(int id);
TaskSpec task_spec(int id, sim::Scene scene);

/// Target demonstration counts per task for teleoperated collection.
int collection_goal(int task_id);

/// Root objects move by the jitter; everything resting on them follows.
sim::Scene jittered_scene(const sim::Scene& scene, const Jitter& jitter, std::uint64_t seed);

/// Concrete primitive for a task step under a policy.
sim::Primitive resolve_step(const TaskStep& step, PolicyKind policy, const sim::Scene& s);

struct PrimitiveOutcome {
  std::string primitive;
  sim::Arm arm = sim::Arm::Left;
  bool ok = false;
  std::string detail;
  std::size_t first_step = 0;
  std::size_t end_step = 0;
  friend bool operator==(const PrimitiveOutcome&, const PrimitiveOutcome&) = default;
};

struct Checkpoint {
  std::string goal;
  std::size_t step = 0;  // number of actions executed when it was checked
  bool held = false;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

struct TrialOptions {
  PolicyKind policy = PolicyKind::ScriptedHybrid;
  bool jitter = false;
  bool record = false;  // keep the episode in the result
  double max_duration_s = 600.0;
  double oscillation_window_s = 60.0;
  double oscillation_eps = 0.02;
  sim::MotionLimits limits;
};

struct TrialResult {
  int task = 0;
  std::uint64_t seed = 0;
  bool success = false;
  FailureCause cause = FailureCause::None;
  std::string detail;
  std::vector<PrimitiveOutcome> outcomes;
  std::vector<Checkpoint> checkpoints;
  std::optional<double> error_offset_m;
  double duration_s = 0.0;
  std::size_t steps = 0;
  std::optional<data::Episode> episode;
};

/// Same outcome and metrics, timings included. The episode is not compared.
bool same_result(const TrialResult& a, const TrialResult& b);

TrialResult run_trial(const TaskSpec& task, std::uint64_t seed, const TrialOptions& opts = {});

struct SuiteResult {
  int task = 0;
  PolicyKind policy = PolicyKind::ScriptedHybrid;
  std::vector<TrialResult> trials;  // sorted by seed
  int successes() const;
  std::map<FailureCause, int> causes() const;
  std::optional<double> mean_error_offset() const;
  double success_rate() const;
};

SuiteResult run_suite(const TaskSpec& task, int trials, std::uint64_t seed_base, const TrialOptions& opts = {});

/// task,seed,success,cause,duration_s,error_offset_m
void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, const std::vector<TrialResult>& trials);
std::string summary_line(const SuiteResult& r);
/// Success-rate table: one row per policy, one column per task.
std::string results_table(const std::vector<SuiteResult>& suites);

/// Sliding-window confinement check over one or more arms. Fires when, for
/// every arm, all samples in the last `window_s` seconds lie within eps/2 of
/// that window's mean (a ball of diameter eps).
class OscillationMonitor {
 public:
  OscillationMonitor(std::size_t arms, double rate_hz, double window_s = 60.0, double eps = 0.02);

  /// Adds one sample per arm; returns true once the rule has fired.
  bool push(std::span<const Vec3d> positions);
  bool fired() const { return fired_; }

 private:
  struct Track {
    std::deque<Vec3d> samples;
    std::array<std::deque<std::pair<std::size_t, double>>, 3> lo;
    std::array<std::deque<std::pair<std::size_t, double>>, 3> hi;
  };
  bool confined(const Track& t) const;

  std::vector<Track> tracks_;
  std::size_t window_samples_;
  double eps_;
  std::size_t count_ = 0;
  bool fired_ = false;
};

bool detect_oscillation(const std::vector<Vec3d>& history, double rate_hz, double window_s = 60.0,
                        double eps = 0.02);
/// Multi-arm form: fires only if all arms are confined over the same window.
bool detect_oscillation(const std::vector<std::vector<Vec3d>>& arms, double rate_hz, double window_s = 60.0,
                        double eps = 0.02);

/// Planar distance from the lid ("lid") center to the container ("container")
/// mouth center. Throws LidAbsent if either is missing.
double lid_offset(const sim::Scene& s);
/// Lid resting on the container within 0.02 m of center.
bool lid_capped(const sim::Scene& s);

}  // namespace vacgrip::harness

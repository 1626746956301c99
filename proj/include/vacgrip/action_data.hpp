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
 * Action and observation layouts for the suction-gripper policy data.
 *
 * Action (16):   [0..5]  left joints, [6..11] right joints,
 *                [12] left gripper width, [13] right gripper width,
 *                [14] left suction, [15] right suction (0 or 1)
 * Proprio (14):  [0..5]  left joints, [6..11] right joints,
 *                [12] left gripper width, [13] right gripper width
 *
 * Suction appears only on the action side. A policy that saw the current
 * suction bit as input would learn to copy it, because the bit changes in only
 * a handful of chunks per episode.
 */

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vacgrip::data {

inline constexpr int kArmJoints = 6;
inline constexpr int kActionDim = 16;
inline constexpr int kProprioDim = 14;
inline constexpr int kLeftSuction = 14;
inline constexpr int kRightSuction = 15;

using JointVector = Eigen::Matrix<double, kArmJoints, 1>;
using ActionArray = Eigen::Matrix<double, kActionDim, 1>;
using ProprioArray = Eigen::Matrix<double, kProprioDim, 1>;

/// Names of the 16 action indices, in order.
const std::array<std::string, kActionDim>& action_layout();
const std::array<std::string, kProprioDim>& proprio_layout();

class ActionVector {
 public:
  ActionVector() : v_(ActionArray::Zero()) {}

  /// Throws DimensionError unless exactly 16 values, DomainError if a suction
  /// entry is not 0/1 or a width is negative.
  static ActionVector from_values(std::span<const double> values);
  explicit ActionVector(const ActionArray& v);

  const ActionArray& values() const { return v_; }
  double operator[](int i) const { return v_[i]; }

  JointVector left_joints() const { return v_.segment<kArmJoints>(0); }
  JointVector right_joints() const { return v_.segment<kArmJoints>(kArmJoints); }
  double width(int arm) const { return v_[12 + arm]; }
  bool suction(int arm) const { return v_[kLeftSuction + arm] != 0.0; }

  friend bool operator==(const ActionVector& a, const ActionVector& b) { return a.v_ == b.v_; }

 private:
  ActionArray v_;
};

/// Proprioceptive state: joints and gripper widths only. There is no slot for
/// suction; a 15-value input is rejected rather than truncated.
class ProprioState {
 public:
  ProprioState() : v_(ProprioArray::Zero()) {}
  static ProprioState from_values(std::span<const double> values);
  explicit ProprioState(const ProprioArray& v) : v_(v) {}

  const ProprioArray& values() const { return v_; }
  JointVector joints(int arm) const { return v_.segment<kArmJoints>(arm * kArmJoints); }
  double width(int arm) const { return v_[12 + arm]; }

  friend bool operator==(const ProprioState& a, const ProprioState& b) { return a.v_ == b.v_; }

 private:
  ProprioArray v_;
};

struct ActionParts {
  std::vector<double> left_joints;
  std::vector<double> right_joints;
  std::vector<double> widths;
  std::vector<double> suction;
  friend bool operator==(const ActionParts&, const ActionParts&) = default;
};

ActionVector assemble_action(std::span<const double> left_joints, std::span<const double> right_joints,
                             std::span<const double> widths, std::span<const double> suction);
ActionParts split_action(const ActionVector& a);

/// What the simulator knows about one arm.
struct ArmReading {
  JointVector joints = JointVector::Zero();
  double gripper_width = 0.0;
  bool suction_on = false;
};

/// Builds the 14-value observation. Suction is dropped by construction.
ProprioState proprio_from_sim(const std::array<ArmReading, 2>& arms);

struct EpisodeStep {
  double t = 0.0;
  ProprioState proprio;
  ActionVector action;
  std::array<double, 2> pressure_kpa{0.0, 0.0};
  std::optional<std::string> subtask;
  std::vector<std::string> image_refs;
};

struct SubtaskSpan {
  std::size_t begin = 0;  // first step
  std::size_t end = 0;    // one past the last step
  std::string text;
  friend bool operator==(const SubtaskSpan&, const SubtaskSpan&) = default;
};

struct EpisodeMeta {
  int task_id = 0;
  std::string instruction;
  double rate_hz = 30.0;
  std::string arm = "both";
  std::uint64_t seed = 0;
  nlohmann::json initial_scene;  // null when the episode carries no scene
};

struct Episode {
  EpisodeMeta meta;
  std::vector<EpisodeStep> steps;

  std::vector<SubtaskSpan> subtasks() const;
  std::vector<ActionVector> actions() const;
};

/// Throws ValidationError naming the first offending step: timestamps must
/// strictly increase, suction entries must be binary, widths non-negative.
void validate_episode(const Episode& ep);

struct ActionChunk {
  int horizon = 0;
  std::size_t start_index = 0;
  std::size_t pad_length = 0;  // trailing entries that repeat the final action
  std::vector<ActionVector> actions;
};

/// Chunks start every `stride` steps (default: stride = horizon). A chunk that
/// runs past the end is padded by repeating the last action.
std::vector<ActionChunk> chunk_actions(const std::vector<ActionVector>& actions, int horizon, int stride = 0);
std::vector<ActionChunk> chunk_episode(const Episode& ep, int horizon, int stride = 0);

/// Inverse of strided chunking (stride = horizon): concatenates chunks and
/// drops the padding.
std::vector<ActionVector> flatten_chunks(const std::vector<ActionChunk>& chunks);

/// Steps k >= 1 where either suction bit differs from step k-1.
std::vector<std::size_t> toggle_edges(const std::vector<ActionVector>& actions);

struct SparsityCounts {
  std::size_t chunks = 0;
  std::size_t chunks_with_toggle = 0;
  double fraction() const { return chunks ? static_cast<double>(chunks_with_toggle) / chunks : 0.0; }
  friend bool operator==(const SparsityCounts&, const SparsityCounts&) = default;
};

struct SparsityReport {
  SparsityCounts overall;
  std::map<int, SparsityCounts> per_task;
  std::map<std::size_t, std::size_t> toggles_per_chunk;  // histogram
  friend bool operator==(const SparsityReport&, const SparsityReport&) = default;
};

/// Fraction of chunks that contain at least one suction toggle edge. An edge
/// at step k belongs to every chunk whose window covers k.
SparsityReport toggle_sparsity(const std::vector<Episode>& dataset, int horizon, int stride = 0);

nlohmann::json to_json(const SparsityReport& r);

}  // namespace vacgrip::data

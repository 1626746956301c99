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

#include "vacgrip/action_data.hpp"

#include <algorithm>
#include <cmath>

#include "vacgrip/errors.hpp"

namespace vacgrip::data {

namespace {

void check_dim(std::span<const double> values, std::size_t expected, const char* what) {
  if (values.size() != expected) {
    throw DimensionError(std::string(what) + " needs " + std::to_string(expected) + " values, got " +
                         std::to_string(values.size()));
  }
}

void check_action_domain(const ActionArray& v) {
  for (int i = 0; i < kActionDim; ++i) {
    if (!std::isfinite(v[i])) throw DomainError("action entry " + std::to_string(i) + " is not finite");
  }
  for (int i : {kLeftSuction, kRightSuction}) {
    if (v[i] != 0.0 && v[i] != 1.0) {
      throw DomainError("suction entry " + std::to_string(i) + " must be 0 or 1, got " + std::to_string(v[i]));
    }
  }
  for (int i : {12, 13}) {
    if (v[i] < 0.0) throw DomainError("gripper width " + std::to_string(i) + " is negative");
  }
}

std::size_t effective_stride(int horizon, int stride) {
  if (horizon < 1) throw DomainError("chunk horizon must be >= 1");
  if (stride < 0) throw DomainError("chunk stride must be >= 1");
  return static_cast<std::size_t>(stride == 0 ? horizon : stride);
}

}  // namespace

const std::array<std::string, kActionDim>& action_layout() {
  static const std::array<std::string, kActionDim> names{
      "left_joint_0",  "left_joint_1",  "left_joint_2",  "left_joint_3",    "left_joint_4",  "left_joint_5",
      "right_joint_0", "right_joint_1", "right_joint_2", "right_joint_3",   "right_joint_4", "right_joint_5",
      "left_gripper_width", "right_gripper_width", "left_suction", "right_suction"};
  return names;
}

const std::array<std::string, kProprioDim>& proprio_layout() {
  static const std::array<std::string, kProprioDim> names = [] {
    std::array<std::string, kProprioDim> n;
    std::copy_n(action_layout().begin(), kProprioDim, n.begin());
    return n;
  }();
  return names;
}

ActionVector::ActionVector(const ActionArray& v) : v_(v) { check_action_domain(v_); }

ActionVector ActionVector::from_values(std::span<const double> values) {
  check_dim(values, kActionDim, "action");
  return ActionVector(ActionArray(Eigen::Map<const ActionArray>(values.data())));
}

ProprioState ProprioState::from_values(std::span<const double> values) {
  check_dim(values, kProprioDim, "proprio");
  return ProprioState(ProprioArray(Eigen::Map<const ProprioArray>(values.data())));
}

ActionVector assemble_action(std::span<const double> left_joints, std::span<const double> right_joints,
                             std::span<const double> widths, std::span<const double> suction) {
  check_dim(left_joints, kArmJoints, "left joints");
  check_dim(right_joints, kArmJoints, "right joints");
  check_dim(widths, 2, "gripper widths");
  check_dim(suction, 2, "suction flags");
  ActionArray v;
  v << Eigen::Map<const JointVector>(left_joints.data()), Eigen::Map<const JointVector>(right_joints.data()),
      widths[0], widths[1], suction[0], suction[1];
  return ActionVector(v);
}

ActionParts split_action(const ActionVector& a) {
  const auto& v = a.values();
  ActionParts p;
  p.left_joints.assign(v.data(), v.data() + 6);
  p.right_joints.assign(v.data() + 6, v.data() + 12);
  p.widths = {v[12], v[13]};
  p.suction = {v[14], v[15]};
  return p;
}

ProprioState proprio_from_sim(const std::array<ArmReading, 2>& arms) {
  ProprioArray v;
  v << arms[0].joints, arms[1].joints, arms[0].gripper_width, arms[1].gripper_width;
  return ProprioState(v);
}

std::vector<SubtaskSpan> Episode::subtasks() const {
  std::vector<SubtaskSpan> spans;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i].subtask;
    if (!s) continue;
    if (!spans.empty() && spans.back().end == i && spans.back().text == *s) {
      spans.back().end = i + 1;
    } else {
      spans.push_back({i, i + 1, *s});
    }
  }
  return spans;
}

std::vector<ActionVector> Episode::actions() const {
  std::vector<ActionVector> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.action);
  return out;
}

void validate_episode(const Episode& ep) {
  if (ep.meta.rate_hz <= 0) throw ValidationError(-1, "episode rate_hz must be positive");
  for (std::size_t i = 0; i < ep.steps.size(); ++i) {
    const auto& s = ep.steps[i];
    const auto fail = [&](const std::string& why) {
      throw ValidationError(static_cast<long>(i), why);
    };
    if (!std::isfinite(s.t)) fail("timestamp not finite");
    if (i > 0 && !(s.t > ep.steps[i - 1].t)) fail("timestamps must strictly increase");
    try {
      check_action_domain(s.action.values());
    } catch (const DomainError& e) {
      fail(e.what());
    }
    if (!s.proprio.values().allFinite()) fail("proprio not finite");
    if (s.proprio.width(0) < 0 || s.proprio.width(1) < 0) fail("negative gripper width in proprio");
    for (double p : s.pressure_kpa) {
      if (!(p <= 0.0 && p >= -60.0)) fail("pressure outside [-60, 0] kPa");
    }
  }
}

std::vector<ActionChunk> chunk_actions(const std::vector<ActionVector>& actions, int horizon, int stride) {
  const std::size_t step = effective_stride(horizon, stride);
  if (actions.empty()) throw EmptyEpisode("cannot chunk an empty episode");
  const auto H = static_cast<std::size_t>(horizon);
  std::vector<ActionChunk> chunks;
  for (std::size_t start = 0; start < actions.size(); start += step) {
    ActionChunk c;
    c.horizon = horizon;
    c.start_index = start;
    const std::size_t end = std::min(start + H, actions.size());
    c.actions.assign(actions.begin() + static_cast<std::ptrdiff_t>(start),
                     actions.begin() + static_cast<std::ptrdiff_t>(end));
    c.pad_length = H - (end - start);
    c.actions.resize(H, actions.back());
    chunks.push_back(std::move(c));
  }
  return chunks;
}

std::vector<ActionChunk> chunk_episode(const Episode& ep, int horizon, int stride) {
  return chunk_actions(ep.actions(), horizon, stride);
}

std::vector<ActionVector> flatten_chunks(const std::vector<ActionChunk>& chunks) {
  std::vector<ActionVector> out;
  for (const auto& c : chunks) {
    out.insert(out.end(), c.actions.begin(), c.actions.end() - static_cast<std::ptrdiff_t>(c.pad_length));
  }
  return out;
}

std::vector<std::size_t> toggle_edges(const std::vector<ActionVector>& actions) {
  std::vector<std::size_t> edges;
  for (std::size_t k = 1; k < actions.size(); ++k) {
    for (int ch : {kLeftSuction, kRightSuction}) {
      if (actions[k][ch] != actions[k - 1][ch]) edges.push_back(k);
    }
  }
  return edges;
}

SparsityReport toggle_sparsity(const std::vector<Episode>& dataset, int horizon, int stride) {
  const std::size_t step = effective_stride(horizon, stride);
  const auto H = static_cast<std::size_t>(horizon);
  SparsityReport report;
  for (const auto& ep : dataset) {
    const std::size_t n = ep.steps.size();
    if (n == 0) continue;
    const std::size_t n_chunks = (n + step - 1) / step;
    std::vector<std::size_t> per_chunk(n_chunks, 0);
    // Single pass over the steps; each edge is credited to the chunks whose
    // window [m*step, m*step + H) covers it.
    for (std::size_t k = 1; k < n; ++k) {
      int edges_here = 0;
      for (int ch : {kLeftSuction, kRightSuction}) {
        if (ep.steps[k].action[ch] != ep.steps[k - 1].action[ch]) ++edges_here;
      }
      if (edges_here == 0) continue;
      const std::size_t m_hi = std::min(k / step, n_chunks - 1);
      const std::size_t m_lo = k + 1 > H ? (k + 1 - H + step - 1) / step : 0;
      for (std::size_t m = m_lo; m <= m_hi; ++m) per_chunk[m] += static_cast<std::size_t>(edges_here);
    }
    auto& task = report.per_task[ep.meta.task_id];
    for (std::size_t c : per_chunk) {
      ++report.toggles_per_chunk[c];
      ++task.chunks;
      ++report.overall.chunks;
      if (c > 0) {
        ++task.chunks_with_toggle;
        ++report.overall.chunks_with_toggle;
      }
    }
  }
  return report;
}

nlohmann::json to_json(const SparsityReport& r) {
  nlohmann::json j;
  j["overall"] = {{"chunks", r.overall.chunks},
                  {"chunks_with_toggle", r.overall.chunks_with_toggle},
                  {"fraction", r.overall.fraction()}};
  for (const auto& [task, c] : r.per_task) {
    j["per_task"][std::to_string(task)] = {
        {"chunks", c.chunks}, {"chunks_with_toggle", c.chunks_with_toggle}, {"fraction", c.fraction()}};
  }
  for (const auto& [toggles, count] : r.toggles_per_chunk) j["toggles_per_chunk"][std::to_string(toggles)] = count;
  return j;
}

}  // namespace vacgrip::data

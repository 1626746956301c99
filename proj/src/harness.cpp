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

#include "vacgrip/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "vacgrip/errors.hpp"
#include "vacgrip/scene_io.hpp"

namespace vacgrip::harness {

using sim::Arm;
using sim::Scene;

std::string_view to_string(FailureCause c) {
  switch (c) {
    case FailureCause::None: return "None";
    case FailureCause::PredicateUnmet: return "PredicateUnmet";
    case FailureCause::Oscillation: return "Oscillation";
    case FailureCause::PrimitiveInfeasible: return "PrimitiveInfeasible";
    case FailureCause::AttachmentLost: return "AttachmentLost";
  }
  return "?";
}

std::string_view to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::ScriptedHybrid: return "scripted";
    case PolicyKind::GraspOnly: return "grasp-only";
    case PolicyKind::Frozen: return "frozen";
  }
  return "?";
}

PolicyKind policy_from_string(std::string_view s) {
  if (s == "scripted" || s == "hybrid") return PolicyKind::ScriptedHybrid;
  if (s == "grasp-only" || s == "grasp") return PolicyKind::GraspOnly;
  if (s == "frozen") return PolicyKind::Frozen;
  throw ConfigError("unknown policy '" + std::string(s) + "' (scripted, grasp-only, frozen)");
}

namespace {

bool inside(const Scene& s, const char* obj, const char* container) {
  return s.find(obj) && s.find(container) && sim::inside(s, obj, container);
}

double articulation_value(const Scene& s, const char* id) {
  const auto* o = s.find(id);
  return (o && o->articulation) ? o->articulation->value : std::nan("");
}

}  // namespace

TaskSpec task_spec(int id) { return task_spec(id, sim::builtin_scene(id)); }

TaskSpec task_spec(int id, Scene scene) {
  using sim::AttachMode;
  TaskSpec t;
  t.id = id;
  t.scene = std::move(scene);
  t.scene.task_id = id;
  switch (id) {
    case 1:
      t.name = "tray";
      t.steps = {Pick{"slide", AttachMode::SuctionWide, "+z"},
                 sim::Place{"tray", 0.0, 0.08, 0.0},
                 Pick{"banana"},
                 sim::Place{"tray", -0.12, -0.08, kPi / 2},
                 Pick{"wallet", AttachMode::SuctionPoint, "+z"},
                 sim::Place{"tray", 0.01, -0.08, 0.0},
                 Pick{"cucumber"},
                 sim::Place{"tray", 0.13, -0.075, kPi / 2}};
      t.goals = {{"slide in tray", 1, [](const Scene& s) { return inside(s, "slide", "tray"); }},
                 {"banana in tray", 3, [](const Scene& s) { return inside(s, "banana", "tray"); }},
                 {"wallet in tray", 5, [](const Scene& s) { return inside(s, "wallet", "tray"); }},
                 {"all items in tray", 7, [](const Scene& s) {
                    return inside(s, "slide", "tray") && inside(s, "banana", "tray") && inside(s, "wallet", "tray") &&
                           inside(s, "cucumber", "tray");
                  }}};
      break;
    case 2:
      t.name = "container";
      t.steps = {Pick{"lid", AttachMode::SuctionWide, "+z"},
                 sim::Place{std::nullopt, 0.40, -0.36, 0.0},
                 Pick{"banana"},
                 sim::Place{"container", 0.0, 0.0, 0.0},
                 Pick{"lid", AttachMode::SuctionWide, "+z"},
                 sim::Place{"container", 0.0, 0.0, 0.0},
                 sim::Press{"lid"}};
      t.goals = {{"lid removed", 1, [](const Scene& s) { return s.find("lid") && s.at("lid").resting_on != "container"; }},
                 {"banana in container", 3, [](const Scene& s) { return inside(s, "banana", "container"); }},
                 {"container capped", 6, [](const Scene& s) {
                    return s.find("lid") && lid_capped(s) && inside(s, "banana", "container");
                  }}};
      break;
    case 3:
      t.name = "drawer";
      t.steps = {Pick{"drawer", AttachMode::SuctionPoint, "-x"},
                 sim::Pull{0.20},
                 Pick{"cucumber"},
                 sim::Place{"drawer", -0.05, 0.0, kPi / 2},
                 sim::Push{"drawer", std::nullopt}};
      t.goals = {{"drawer open", 1, [](const Scene& s) { return articulation_value(s, "drawer") >= 0.15; }},
                 {"cucumber in drawer", 3, [](const Scene& s) { return inside(s, "cucumber", "drawer"); }},
                 {"drawer closed", 4, [](const Scene& s) {
                    return articulation_value(s, "drawer") <= 0.02 && inside(s, "cucumber", "drawer");
                  }}};
      break;
    case 4:
      t.name = "box";
      t.steps = {Pick{"flap", AttachMode::SuctionPoint, "+z"}, sim::Lift{deg2rad(110.0)}};
      t.goals = {{"flap open", 1, [](const Scene& s) { return articulation_value(s, "flap") >= deg2rad(90.0); }}};
      break;
    default:
      throw ConfigError("task id must be 1..4, got " + std::to_string(id));
  }
  return t;
}

int collection_goal(int task_id) { return task_id == 1 ? 200 : 100; }

Scene jittered_scene(const Scene& scene, const Jitter& jitter, std::uint64_t seed) {
  Scene s = scene;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> offset(-jitter.position, jitter.position);
  std::uniform_real_distribution<double> turn(-deg2rad(jitter.yaw_deg), deg2rad(jitter.yaw_deg));
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    if (s.objects[i].resting_on) continue;
    const double dx = offset(rng);
    const double dy = offset(rng);
    const double dyaw = turn(rng);
    const std::string id = s.objects[i].id;
    const Vec3d c = s.objects[i].pose.translation();
    const Posed D = Eigen::Translation3d(c + Vec3d(dx, dy, 0.0)) * Eigen::AngleAxisd(dyaw, Vec3d::UnitZ()) *
                    Eigen::Translation3d(-c);
    if (s.objects[i].articulation) s.objects[i].base_pose = D * s.objects[i].base_pose;
    sim::move_with_children(s, id, D * s.objects[i].pose);
  }
  return s;
}

sim::Primitive resolve_step(const TaskStep& step, PolicyKind policy, const Scene& s) {
  if (const auto* pick = std::get_if<Pick>(&step)) {
    if (policy == PolicyKind::ScriptedHybrid) {
      const auto* o = s.find(pick->target);
      if (o && o->material.suctionable && o->world_face(pick->face)) {
        return sim::SuctionPick{pick->target, pick->suction_mode, pick->face};
      }
    }
    return sim::GraspPick{pick->target};
  }
  return std::visit(
      [](const auto& x) -> sim::Primitive {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Pick>) {
          return sim::GraspPick{x.target};
        } else {
          return x;
        }
      },
      step);
}

bool same_result(const TrialResult& a, const TrialResult& b) {
  return a.task == b.task && a.seed == b.seed && a.success == b.success && a.cause == b.cause &&
         a.detail == b.detail && a.outcomes == b.outcomes && a.checkpoints == b.checkpoints &&
         a.error_offset_m == b.error_offset_m && a.duration_s == b.duration_s && a.steps == b.steps;
}

namespace {

struct Execution {
  sim::Rig& rig;
  OscillationMonitor& monitor;
  const TrialOptions& opts;
  std::optional<data::Episode>& episode;
  std::size_t steps = 0;

  /// Runs the plan; returns the failure cause (None if every step ran).
  std::pair<FailureCause, std::string> run(const sim::Plan& plan) {
    bool seen = false;
    for (std::size_t k = 0; k < plan.actions.size(); ++k) {
      auto rec = rig.step(plan.actions[k], plan.subtask);
      ++steps;
      if (episode) episode->steps.push_back(std::move(rec));
      const Scene& s = rig.scene();
      const std::array<Vec3d, 2> tcp{sim::tool_pose(s, Arm::Left).translation(),
                                     sim::tool_pose(s, Arm::Right).translation()};
      if (monitor.push(tcp)) return {FailureCause::Oscillation, "end effectors stayed in place for a minute"};
      if (s.time > opts.max_duration_s) return {FailureCause::PredicateUnmet, "trial time limit reached"};
      if (plan.hold_object) {
        const bool holding = sim::holder_of(s, *plan.hold_object) == plan.arm;
        seen = seen || holding;
        if (k >= plan.hold_from && k < plan.hold_until && !holding) {
          if (seen) return {FailureCause::AttachmentLost, *plan.hold_object + " came loose"};
          return {FailureCause::PredicateUnmet, *plan.hold_object + " was not picked up"};
        }
      }
    }
    return {FailureCause::None, {}};
  }
};

}  // namespace

TrialResult run_trial(const TaskSpec& task, std::uint64_t seed, const TrialOptions& opts) {
  TrialResult result;
  result.task = task.id;
  result.seed = seed;
  const Scene initial = opts.jitter ? jittered_scene(task.scene, task.jitter, seed) : task.scene;

  sim::Rig rig(initial);
  OscillationMonitor monitor(2, initial.params.rate_hz, opts.oscillation_window_s, opts.oscillation_eps);
  std::optional<data::Episode> episode;
  if (opts.record) episode = data::Episode{sim::episode_meta(initial, "both", seed), {}};
  Execution exec{rig, monitor, opts, episode};

  std::vector<TaskStep> steps = task.steps;
  const auto fail = [&](FailureCause c, std::string why) {
    result.cause = c;
    result.detail = std::move(why);
  };

  const std::size_t n_steps = opts.policy == PolicyKind::Frozen ? 1 : steps.size();
  for (std::size_t i = 0; i < n_steps && result.cause == FailureCause::None; ++i) {
    const Scene before = rig.scene();
    const sim::Primitive prim = opts.policy == PolicyKind::Frozen
                                    ? sim::Primitive(sim::Hold{opts.max_duration_s})
                                    : resolve_step(steps[i], opts.policy, before);
    const Arm arm = sim::choose_arm(before, prim);
    PrimitiveOutcome out;
    out.primitive = sim::describe(prim);
    out.arm = arm;
    out.first_step = exec.steps;

    sim::Plan plan;
    try {
      plan = sim::plan_primitive(before, arm, prim, opts.limits);
    } catch (const PrimitiveInfeasible& e) {
      out.detail = e.what();
      out.end_step = exec.steps;
      result.outcomes.push_back(out);
      fail(FailureCause::PrimitiveInfeasible, out.primitive + ": " + e.what());
      break;
    }
    auto [cause, why] = exec.run(plan);
    if (cause == FailureCause::None) {
      why = sim::check_postcondition(before, rig.scene(), arm, prim);
      if (!why.empty()) cause = FailureCause::PredicateUnmet;
    }
    out.ok = cause == FailureCause::None;
    out.detail = why;
    out.end_step = exec.steps;
    result.outcomes.push_back(out);
    if (!out.ok) {
      fail(cause, out.primitive + ": " + why);
      break;
    }
    if (opts.policy == PolicyKind::Frozen) break;
    for (const auto& g : task.goals) {
      if (g.after_step != i) continue;
      const bool held = g.holds(rig.scene());
      result.checkpoints.push_back({g.name, exec.steps, held});
      if (!held) {
        fail(FailureCause::PredicateUnmet, "goal not met: " + g.name);
        break;
      }
    }
  }

  if (result.cause == FailureCause::None && opts.policy == PolicyKind::Frozen) {
    fail(FailureCause::PredicateUnmet, "policy did nothing");
  }
  result.success = result.cause == FailureCause::None && result.checkpoints.size() == task.goals.size();
  if (result.cause == FailureCause::None && !result.success) fail(FailureCause::PredicateUnmet, "goals unchecked");
  result.steps = exec.steps;
  result.duration_s = rig.scene().time;
  if (rig.scene().find("lid") && rig.scene().find("container")) result.error_offset_m = lid_offset(rig.scene());
  result.episode = std::move(episode);
  return result;
}

int SuiteResult::successes() const {
  return static_cast<int>(std::count_if(trials.begin(), trials.end(), [](const TrialResult& t) { return t.success; }));
}

std::map<FailureCause, int> SuiteResult::causes() const {
  std::map<FailureCause, int> out;
  for (const auto& t : trials) ++out[t.cause];
  return out;
}

std::optional<double> SuiteResult::mean_error_offset() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& t : trials) {
    if (t.error_offset_m) {
      sum += *t.error_offset_m;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

double SuiteResult::success_rate() const {
  return trials.empty() ? 0.0 : static_cast<double>(successes()) / static_cast<double>(trials.size());
}

SuiteResult run_suite(const TaskSpec& task, int trials, std::uint64_t seed_base, const TrialOptions& opts) {
  if (trials < 1) throw DomainError("trials must be >= 1");
  SuiteResult r;
  r.task = task.id;
  r.policy = opts.policy;
  for (int i = 0; i < trials; ++i) r.trials.push_back(run_trial(task, seed_base + static_cast<std::uint64_t>(i), opts));
  std::sort(r.trials.begin(), r.trials.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
  return r;
}

void write_csv_header(std::ostream& out) { out << "task,seed,success,cause,duration_s,error_offset_m\n"; }

void write_csv_rows(std::ostream& out, const std::vector<TrialResult>& trials) {
  for (const auto& t : trials) {
    out << t.task << ',' << t.seed << ',' << (t.success ? 1 : 0) << ',' << to_string(t.cause) << ','
        << std::fixed << std::setprecision(3) << t.duration_s << ',';
    if (t.error_offset_m) out << std::setprecision(4) << *t.error_offset_m;
    out << std::defaultfloat << '\n';
  }
}

std::string summary_line(const SuiteResult& r) {
  std::ostringstream os;
  os << "task " << r.task << " policy " << to_string(r.policy) << ": " << r.successes() << '/' << r.trials.size()
     << " (" << std::fixed << std::setprecision(1) << 100.0 * r.success_rate() << "%)";
  for (const auto& [cause, n] : r.causes()) {
    if (cause != FailureCause::None) os << ' ' << to_string(cause) << '=' << n;
  }
  if (const auto e = r.mean_error_offset()) os << " mean_error_offset_m=" << std::setprecision(4) << *e;
  return os.str();
}

std::string results_table(const std::vector<SuiteResult>& suites) {
  std::map<PolicyKind, std::map<int, const SuiteResult*>> rows;
  std::map<int, bool> tasks;
  for (const auto& s : suites) {
    rows[s.policy][s.task] = &s;
    tasks[s.task] = true;
  }
  std::ostringstream os;
  os << std::left << std::setw(14) << "policy";
  for (const auto& [t, _] : tasks) os << std::setw(10) << ("task " + std::to_string(t));
  os << '\n';
  for (const auto& [policy, by_task] : rows) {
    os << std::setw(14) << to_string(policy);
    for (const auto& [t, _] : tasks) {
      const auto it = by_task.find(t);
      std::ostringstream cell;
      if (it != by_task.end()) cell << std::fixed << std::setprecision(1) << 100.0 * it->second->success_rate() << '%';
      os << std::setw(10) << cell.str();
    }
    os << '\n';
  }
  return os.str();
}

OscillationMonitor::OscillationMonitor(std::size_t arms, double rate_hz, double window_s, double eps)
    : tracks_(arms), window_samples_(static_cast<std::size_t>(std::llround(window_s * rate_hz)) + 1), eps_(eps) {
  if (arms == 0 || rate_hz <= 0 || window_s <= 0 || eps <= 0) throw DomainError("bad oscillation monitor settings");
}

bool OscillationMonitor::confined(const Track& t) const {
  // Cheap necessary condition first: a ball of diameter eps fits in a box of
  // side eps.
  for (int a = 0; a < 3; ++a) {
    if (t.hi[a].front().second - t.lo[a].front().second > eps_) return false;
  }
  Vec3d mean = Vec3d::Zero();
  for (const auto& p : t.samples) mean += p;
  mean /= static_cast<double>(t.samples.size());
  const double r = eps_ / 2.0;
  return std::all_of(t.samples.begin(), t.samples.end(), [&](const Vec3d& p) { return (p - mean).norm() <= r; });
}

bool OscillationMonitor::push(std::span<const Vec3d> positions) {
  if (positions.size() != tracks_.size()) throw DimensionError("one position per tracked arm expected");
  const std::size_t idx = count_++;
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    Track& t = tracks_[i];
    const Vec3d& p = positions[i];
    t.samples.push_back(p);
    if (t.samples.size() > window_samples_) t.samples.pop_front();
    for (int a = 0; a < 3; ++a) {
      auto& lo = t.lo[a];
      auto& hi = t.hi[a];
      while (!lo.empty() && lo.back().second >= p[a]) lo.pop_back();
      lo.emplace_back(idx, p[a]);
      while (!hi.empty() && hi.back().second <= p[a]) hi.pop_back();
      hi.emplace_back(idx, p[a]);
      const std::size_t oldest = idx + 1 >= window_samples_ ? idx + 1 - window_samples_ : 0;
      while (lo.front().first < oldest) lo.pop_front();
      while (hi.front().first < oldest) hi.pop_front();
    }
  }
  if (!fired_ && count_ >= window_samples_) {
    fired_ = std::all_of(tracks_.begin(), tracks_.end(), [&](const Track& t) { return confined(t); });
  }
  return fired_;
}

bool detect_oscillation(const std::vector<Vec3d>& history, double rate_hz, double window_s, double eps) {
  return detect_oscillation(std::vector<std::vector<Vec3d>>{history}, rate_hz, window_s, eps);
}

bool detect_oscillation(const std::vector<std::vector<Vec3d>>& arms, double rate_hz, double window_s, double eps) {
  if (arms.empty()) return false;
  const std::size_t n = arms.front().size();
  for (const auto& a : arms) {
    if (a.size() != n) throw DimensionError("arm histories differ in length");
  }
  OscillationMonitor m(arms.size(), rate_hz, window_s, eps);
  std::vector<Vec3d> sample(arms.size());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < arms.size(); ++i) sample[i] = arms[i][k];
    if (m.push(sample)) return true;
  }
  return false;
}

double lid_offset(const Scene& s) {
  const auto* lid = s.find("lid");
  const auto* box = s.find("container");
  if (!lid || !box) throw LidAbsent("scene has no lid/container pair");
  return (lid->pose.translation().head<2>() - box->pose.translation().head<2>()).norm();
}

bool lid_capped(const Scene& s) {
  return s.at("lid").resting_on == std::optional<std::string>("container") && !sim::holder_of(s, "lid") &&
         lid_offset(s) <= 0.02;
}

}  // namespace vacgrip::harness

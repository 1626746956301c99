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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "vacgrip/episode_io.hpp"
#include "vacgrip/errors.hpp"
#include "vacgrip/firmware.hpp"
#include "vacgrip/harness.hpp"
#include "vacgrip/pneumatics.hpp"
#include "vacgrip/protocol.hpp"
#include "vacgrip/rig.hpp"
#include "vacgrip/scene_io.hpp"

using namespace vacgrip;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr int kRoundTrips = 100000;
constexpr int kRandomStrings = 100000;
constexpr double kProtocolBudgetS = 10.0;
constexpr int kMaxSequenceLength = 6;
constexpr double kGlassTarget = -60.0;
constexpr double kGlassTolerance = 0.02;
constexpr double kGlassDeadlineS = 1.0;
constexpr int kParameterDraws = 20;
constexpr double kSteadyStateTolerance = 0.01;
constexpr double kJarMass = 0.537;
constexpr double kSafetyFactor = 1.5;
constexpr double kRequiredForce = 7.90;
constexpr double kTwoCupForce = 21.21;
constexpr double kOneCupForce = 2.65;
constexpr double kForceTolerance = 0.005;  // N, two-decimal figures
constexpr int kSyntheticDatasets = 50;
constexpr int kDeterminismRepeats = 10;
constexpr int kSuiteTrials = 15;
constexpr double kSuiteBudgetS = 300.0;
constexpr double kRate = 30.0;
constexpr double kLidOffset = 0.053;
constexpr double kLidTolerance = 1e-9;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Verdict()>& body) {
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  if (!v.pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename... Args>
std::string fmt(const Args&... args) {
  std::ostringstream out;
  (out << ... << args);
  return out.str();
}

// ---------------------------------------------------------------------------

Verdict protocol_robustness() {
  using namespace wire;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2026);

  std::size_t identical = 0;
  for (int i = 0; i < kRoundTrips; ++i) {
    const CommandFrame c{static_cast<CommandKind>(rng() % 3), rng() & 1 ? Channel::Right : Channel::Left};
    StatusFrame s;
    s.channel = rng() & 1 ? Channel::Right : Channel::Left;
    s.pump_on = rng() & 1;
    s.valve_closed = rng() & 1;
    s.pressure_centi_kpa = static_cast<std::int16_t>(-static_cast<int>(rng() % 6001));
    s.fault = static_cast<Fault>(rng() % 3);
    const auto rc = decode_command(encode_command(c));
    const auto rs = decode_status(encode_status(s));
    if (rc.status == DecodeStatus::Ok && *rc.frame == c && rs.status == DecodeStatus::Ok && *rs.frame == s) {
      ++identical;
    }
  }

  std::size_t resynced = 0;
  const CommandFrame cmd_probe{CommandKind::TurnOn, Channel::Left};
  StatusFrame status_probe;
  status_probe.channel = Channel::Right;
  status_probe.pump_on = status_probe.valve_closed = true;
  status_probe.pressure_centi_kpa = -5875;
  const Bytes pad(kMaxPayload + 3, 0x00);
  for (int i = 0; i < kRandomStrings; ++i) {
    Bytes junk(rng() % 64);
    for (auto& b : junk) b = static_cast<std::uint8_t>(rng());
    // Direct decoding of arbitrary bytes must classify, never crash.
    (void)decode_command(junk);
    (void)decode_status(junk);

    CommandDecoder cd;
    StatusDecoder sd;
    cd.feed(junk);
    sd.feed(junk);
    cd.feed(pad);
    sd.feed(pad);
    cd.feed(encode_command(cmd_probe));
    sd.feed(encode_status(status_probe));
    std::optional<CommandFrame> last_cmd;
    std::optional<StatusFrame> last_status;
    for (auto r = cd.next(); r.status != DecodeStatus::Truncated; r = cd.next()) {
      if (r.frame) last_cmd = r.frame;
    }
    for (auto r = sd.next(); r.status != DecodeStatus::Truncated; r = sd.next()) {
      if (r.frame) last_status = r.frame;
    }
    if (last_cmd == cmd_probe && last_status == status_probe) ++resynced;
  }
  const double elapsed = seconds_since(t0);
  const bool pass = identical == kRoundTrips && resynced == kRandomStrings && elapsed < kProtocolBudgetS;
  return {pass, fmt(identical, "/", kRoundTrips, " round trips identical, ", resynced, "/", kRandomStrings,
                    " random strings resynchronised, ", elapsed, " s (limit ", kProtocolBudgetS, " s)")};
}

Verdict state_machine_safety() {
  using namespace wire;
  const CommandKind kinds[] = {CommandKind::TurnOff, CommandKind::TurnOn, CommandKind::Query};
  std::size_t visited = 0, mixed = 0;
  for (Channel ch : {Channel::Left, Channel::Right}) {
    for (const auto& start : {DeviceState::idle(ch), DeviceState::active(ch)}) {
      std::deque<std::pair<DeviceState, int>> frontier{{start, 0}};
      while (!frontier.empty()) {
        const auto [s, depth] = frontier.front();
        frontier.pop_front();
        ++visited;
        if (s.mixed()) ++mixed;
        if (depth == kMaxSequenceLength) continue;
        for (auto k : kinds) {
          const auto [next, status] = firmware::handle_command(s, {k, ch}, PressureStated{});
          if (status.pump_on != status.valve_closed) ++mixed;
          frontier.push_back({next, depth + 1});
        }
      }
    }
  }
  // 2 channels x 2 starts x (3^0 + ... + 3^6) sequences.
  const std::size_t expected = 4 * 1093;
  return {visited == expected && mixed == 0,
          fmt(visited, " sequences of length <= ", kMaxSequenceLength, " enumerated, ", mixed, " mixed states")};
}

PressureStated both_cups(const MaterialProfile& m) {
  PressureStated ps;
  for (auto& c : ps.cups) c = CupContact{true, m};
  return ps;
}

Verdict pneumatic_fidelity() {
  const auto table = MaterialTable::defaults();
  const DeviceState on = DeviceState::active(wire::Channel::Left);
  const PneumaticParamsd params;

  // Sealed glass from ambient for the deadline.
  const auto glass = advance_pressure(both_cups(table.at("glass")), on, params, kGlassDeadlineS);
  const double glass_err = std::abs(glass.gauge_kpa - kGlassTarget) / std::abs(kGlassTarget);

  // Random parameters against the closed form, computed here from scratch.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> p_min(-90.0, -20.0), k_pump(1.0, 20.0), leak(0.0, 20.0), k_open(5.0, 30.0);
  double worst = 0.0;
  for (int i = 0; i < kParameterDraws; ++i) {
    PneumaticParamsd p;
    p.p_min = p_min(rng);
    p.k_pump = k_pump(rng);
    p.k_open_cup = k_open(rng);
    PressureStated ps;
    double k_leak = 0.0;
    for (auto& c : ps.cups) {
      if (rng() & 1) {
        c = CupContact{true, MaterialProfile{"m", leak(rng), true}};
        k_leak += c.material->leak_coeff;
      } else {
        k_leak += p.k_open_cup;
      }
    }
    const double analytic = p.p_min * p.k_pump / (p.k_pump + k_leak);
    const double settle = 20.0 / (p.k_pump + k_leak);
    const double sim = advance_pressure(ps, on, p, settle).gauge_kpa;
    worst = std::max(worst, std::abs(sim - analytic) / std::abs(analytic));
  }

  // Material ordering by plateau magnitude.
  std::vector<double> plateaus;
  for (const char* name : {"glass", "plastic", "leather", "cardboard"}) {
    plateaus.push_back(std::abs(advance_pressure(both_cups(table.at(name)), on, params, 5.0).gauge_kpa));
  }
  const bool ordered = plateaus[0] > plateaus[1] && plateaus[1] > plateaus[2] && plateaus[2] > plateaus[3];

  const bool pass = glass_err <= kGlassTolerance && worst <= kSteadyStateTolerance && ordered;
  return {pass, fmt("glass at ", kGlassDeadlineS, " s = ", glass.gauge_kpa, " kPa (", glass_err * 100,
                    "% off), worst steady-state error ", worst * 100, "% over ", kParameterDraws,
                    " draws, |P_ss| glass/plastic/leather/cardboard = ", plateaus[0], "/", plateaus[1], "/",
                    plateaus[2], "/", plateaus[3])};
}

Verdict payload() {
  const auto table = MaterialTable::defaults();
  const DeviceState on = DeviceState::active(wire::Channel::Left);
  const PneumaticParamsd params;
  const double required = kJarMass * kGravity * kSafetyFactor;

  const auto two = advance_pressure(both_cups(table.at("glass")), on, params, 3.0);
  PressureStated vented;
  vented.cups[0] = CupContact{true, table.at("glass")};
  const auto one = advance_pressure(vented, on, params, 3.0);

  const double f2 = suction_force(two, params);
  const double f1 = suction_force(one, params);
  const double o2 = oracle::cup_force(two.gauge_kpa, 2);
  const double o1 = oracle::cup_force(one.gauge_kpa, 1);
  const bool holds2 = holds_payload(two, kJarMass, params, kSafetyFactor);
  const bool holds1 = holds_payload(one, kJarMass, params, kSafetyFactor);

  const bool pass = std::abs(required - kRequiredForce) <= kForceTolerance &&
                    std::abs(f2 - kTwoCupForce) <= kForceTolerance && std::abs(f1 - kOneCupForce) <= kForceTolerance &&
                    std::abs(f2 - o2) <= 1e-9 && std::abs(f1 - o1) <= 1e-9 && holds2 && !holds1;
  return {pass, fmt("required ", required, " N; two cups ", f2, " N (holds=", holds2, "); one cup venting ", f1,
                    " N at ", one.gauge_kpa, " kPa (holds=", holds1, ")")};
}

std::vector<data::Episode> fixture_episodes() {
  std::vector<data::Episode> out;
  for (const auto& p : data::list_episodes(fs::path(VACGRIP_SOURCE_DIR) / "tests" / "fixtures")) {
    out.push_back(data::read_episode(p));
  }
  return out;
}

std::vector<data::Episode> recorded_episodes() {
  std::vector<data::Episode> out;
  for (int t = 1; t <= 4; ++t) {
    for (bool jitter : {false, true}) {
      harness::TrialOptions opts;
      opts.jitter = jitter;
      opts.record = true;
      auto r = harness::run_trial(harness::task_spec(t), 40 + static_cast<std::uint64_t>(t), opts);
      if (r.episode) out.push_back(std::move(*r.episode));
    }
  }
  return out;
}

// Rewrites step `k` of a serialised episode with a 15-value proprio.
std::string with_wide_proprio(const data::Episode& ep, std::size_t k) {
  std::ostringstream out;
  out << data::header_record(ep.meta).dump() << '\n';
  for (std::size_t i = 0; i < ep.steps.size(); ++i) {
    auto rec = data::step_record(ep.steps[i]);
    if (i == k) rec["proprio"].push_back(1.0);
    out << rec.dump() << '\n';
  }
  return out.str();
}

Verdict shortcut_guard(const std::vector<data::Episode>& recorded, const std::vector<data::Episode>& fixtures) {
  std::size_t steps = 0, bad = 0;
  for (const auto* set : {&recorded, &fixtures}) {
    for (const auto& ep : *set) {
      for (const auto& s : ep.steps) {
        ++steps;
        const auto& a = s.action.values();
        const bool binary = (a[14] == 0.0 || a[14] == 1.0) && (a[15] == 0.0 || a[15] == 1.0);
        if (s.proprio.values().size() != 14 || a.size() != 16 || !binary) ++bad;
      }
    }
  }
  std::size_t layout_suction = 0;
  for (const auto& name : data::proprio_layout()) layout_suction += name.find("suction") != std::string::npos;

  // Every boundary that accepts a proprio vector from outside.
  std::size_t rejected = 0, boundaries = 0;
  const std::vector<double> wide(15, 0.0);
  ++boundaries;
  try {
    (void)data::ProprioState::from_values(wide);
  } catch (const DimensionError&) {
    ++rejected;
  }
  const auto& sample = recorded.front();
  ++boundaries;
  try {
    std::istringstream in(with_wide_proprio(sample, sample.steps.size() / 2));
    (void)data::parse_episode(in);
  } catch (const CorruptRecord&) {
    ++rejected;
  }
  ++boundaries;
  try {
    auto meta = data::header_record(sample.meta);
    meta["proprio_layout"].push_back("left_suction");
    std::istringstream in(meta.dump() + "\n");
    (void)data::parse_episode(in);
  } catch (const Error&) {
    ++rejected;
  }

  // Sparsity against the brute-force scan.
  std::mt19937_64 rng(5150);
  int agree = 0;
  for (int d = 0; d < kSyntheticDatasets; ++d) {
    std::vector<data::Episode> dataset;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int e = 0; e < n; ++e) {
      const double flip = std::uniform_real_distribution<double>(0.0, 0.1)(rng);
      dataset.push_back(oracle::synthetic_episode(rng, 1 + rng() % 400, 1 + static_cast<int>(rng() % 4), flip));
    }
    const int horizon = 1 + static_cast<int>(rng() % 60);
    const int stride = static_cast<int>(rng() % 2 ? 0 : 1 + rng() % 60);
    if (data::toggle_sparsity(dataset, horizon, stride) == oracle::sparsity(dataset, horizon, stride)) ++agree;
  }

  const std::size_t episodes = recorded.size() + fixtures.size();
  const bool pass = !fixtures.empty() && bad == 0 && layout_suction == 0 && rejected == boundaries &&
                    agree == kSyntheticDatasets;
  return {pass, fmt(episodes, " episodes (", fixtures.size(), " fixtures), ", steps, " steps, ", bad,
                    " malformed; 15-value proprio rejected at ", rejected, "/", boundaries, " boundaries; sparsity ",
                    agree, "/", kSyntheticDatasets, " datasets match the oracle")};
}

Verdict determinism(const std::vector<data::Episode>& recorded, const std::vector<data::Episode>& fixtures) {
  std::size_t replayed = 0, exact = 0;
  for (const auto* set : {&recorded, &fixtures}) {
    for (const auto& ep : *set) {
      ++replayed;
      const auto rep = sim::replay_episode(ep);
      if (rep.steps == ep.steps.size() && !rep.first_mismatch) ++exact;
    }
  }
  int repeat_ok = 0;
  for (int t = 1; t <= 4; ++t) {
    harness::TrialOptions opts;
    opts.jitter = true;
    const auto spec = harness::task_spec(t);
    const auto first = harness::run_trial(spec, 9000 + static_cast<std::uint64_t>(t), opts);
    bool all = true;
    for (int i = 1; i < kDeterminismRepeats; ++i) {
      all = all && harness::same_result(first, harness::run_trial(spec, 9000 + static_cast<std::uint64_t>(t), opts));
    }
    repeat_ok += all;
  }
  return {replayed > 0 && exact == replayed && repeat_ok == 4,
          fmt(exact, "/", replayed, " episodes replay bit-exactly; run_trial x", kDeterminismRepeats, " agrees on ",
              repeat_ok, "/4 tasks")};
}

Verdict task_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream rows;
  bool pass = true;
  for (int t = 1; t <= 4; ++t) {
    const auto spec = harness::task_spec(t);
    const auto scripted = harness::run_suite(spec, kSuiteTrials, 0, {harness::PolicyKind::ScriptedHybrid, false});
    const auto grasp = harness::run_suite(spec, kSuiteTrials, 0, {harness::PolicyKind::GraspOnly, false});
    pass = pass && scripted.successes() == kSuiteTrials && grasp.successes() == 0;
    rows << " T" << t << " " << scripted.successes() << "/" << kSuiteTrials << " vs " << grasp.successes() << "/"
         << kSuiteTrials << ";";
  }
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed < kSuiteBudgetS;
  return {pass, fmt("scripted vs grasp-only:", rows.str(), " ", elapsed, " s (limit ", kSuiteBudgetS, " s)")};
}

Verdict oscillation() {
  const Vec3d origin(0.4, 0.2, 0.3);
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto samples = [](double s) { return static_cast<std::size_t>(std::llround(s * kRate)); };

  // 61 s of dither inside a 1.8 cm cube's inscribed ball.
  std::vector<Vec3d> dither;
  for (std::size_t i = 0; i < samples(61.0); ++i) {
    dither.push_back(origin + 0.009 * Vec3d(u(rng), u(rng), u(rng)).normalized() * std::abs(u(rng)));
  }
  // 59 s stall, then progress.
  std::vector<Vec3d> stall(samples(59.0), origin);
  for (std::size_t i = 1; i <= samples(5.0); ++i) stall.push_back(origin + Vec3d(0.05 * i / kRate, 0, 0));
  // Steady motion at 1 cm/s for two minutes.
  std::vector<Vec3d> steady;
  for (std::size_t i = 0; i < samples(120.0); ++i) steady.push_back(origin + Vec3d(0.01 * i / kRate, 0, 0));

  const bool a = harness::detect_oscillation(dither, kRate);
  const bool b = harness::detect_oscillation(stall, kRate);
  const bool c = harness::detect_oscillation(steady, kRate);
  return {a && !b && !c, fmt("61 s dither fires=", a, ", 59 s stall + progress fires=", b,
                             ", steady motion fires=", c)};
}

Verdict lid_metric() {
  auto s = sim::builtin_scene(2);
  const double before = harness::lid_offset(s);
  // A displacement of exactly 0.053 m along a 3-4-5 direction.
  Posed p = s.at("lid").pose;
  p.translation() += Vec3d(0.6 * kLidOffset, 0.8 * kLidOffset, 0.0);
  sim::move_with_children(s, "lid", p);
  const double after = harness::lid_offset(s);
  return {std::abs(before) <= kLidTolerance && std::abs(after - kLidOffset) <= kLidTolerance,
          fmt("lid_offset = ", after, " m on the displaced fixture (", before, " m before)")};
}

}  // namespace

int main() {
  std::cout.precision(6);
  criterion("protocol-robustness", protocol_robustness);
  criterion("state-machine-safety", state_machine_safety);
  criterion("pneumatic-fidelity", pneumatic_fidelity);
  criterion("payload", payload);

  std::vector<data::Episode> recorded, fixtures;
  try {
    recorded = recorded_episodes();
    fixtures = fixture_episodes();
  } catch (const std::exception& e) {
    std::cout << "FAIL episode-setup: " << e.what() << std::endl;
    ++failures;
  }
  criterion("shortcut-guard", [&] { return shortcut_guard(recorded, fixtures); });
  criterion("determinism", [&] { return determinism(recorded, fixtures); });
  criterion("task-suite", task_suite);
  criterion("oscillation-detector", oscillation);
  criterion("lid-offset-metric", lid_metric);

  std::cout << (failures == 0 ? "all criteria passed" : fmt(failures, " criteria failed")) << std::endl;
  return failures == 0 ? 0 : 1;
}

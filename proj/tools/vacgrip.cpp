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

// vacgrip: command-line front end. Results go to stdout, diagnostics to
// stderr. Exit codes: 0 success, 1 domain error, 2 usage error.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vacgrip/byte_stream.hpp"
#include "vacgrip/config.hpp"
#include "vacgrip/episode_io.hpp"
#include "vacgrip/errors.hpp"
#include "vacgrip/firmware.hpp"
#include "vacgrip/harness.hpp"
#include "vacgrip/pneumatics.hpp"
#include "vacgrip/scene_io.hpp"
#include "vacgrip/teleop_server.hpp"

namespace {

using namespace vacgrip;
using nlohmann::json;

struct Options {
  std::optional<std::string> config_path;

  // device
  std::string channel = "left";
  std::string listen = "127.0.0.1:0";
  std::string device_material = "glass";
  bool once = false;

  // pneumo plot
  std::string material = "glass";
  double close_s = 1.0, open_s = 2.0, suction_s = 3.0, sample_dt = 0.01;

  // sim run / serve
  std::string scene = "task1.scene";
  std::string policy = "scripted";
  std::string out;
  std::uint64_t seed = 0;
  bool jitter = false;

  // harness run
  std::vector<int> tasks;
  std::vector<std::string> policies;
  int trials = 15;
  std::uint64_t seed_base = 0;

  // data
  std::string path;
  int horizon = 50;
  int stride = 0;

  // serve
  int port = 8080;
  double rate = 30.0;
  std::string address = "127.0.0.1";
  std::string static_dir;
  std::string episode_dir;
};

void print_json(const json& j) { std::cout << j.dump() << std::endl; }

int cmd_device(const Options& o) {
  const Config cfg = resolve_config(o.config_path);
  const auto channel = o.channel == "right" ? wire::Channel::Right : wire::Channel::Left;
  const MaterialProfile material = cfg.materials().at(o.device_material);

  // Line pressure follows the device state in wall-clock time, with both cups
  // sealed on the chosen material.
  std::mutex mu;
  PressureStated ps;
  ps.cups = {CupContact{material.suctionable, material}, CupContact{material.suctionable, material}};
  auto last = std::chrono::steady_clock::now();
  firmware::Device* dev_ptr = nullptr;
  firmware::Device device(channel, [&] {
    std::lock_guard lock(mu);
    const auto now = std::chrono::steady_clock::now();
    const double dt = std::chrono::duration<double>(now - last).count();
    last = now;
    if (dt > 0 && dev_ptr) ps = advance_pressure(ps, dev_ptr->state(), cfg.pneumatics, dt);
    return ps;
  });
  dev_ptr = &device;

  TcpListener listener(o.listen);
  const auto [host, _] = split_address(o.listen);
  print_json({{"listening", host + ":" + std::to_string(listener.port())}, {"channel", o.channel}});
  do {
    auto conn = listener.accept();
    const auto stats = firmware::run_device_loop(*conn, *conn, device);
    std::cerr << "connection closed: " << stats.commands << " commands, " << stats.rejected_frames
              << " rejected frames\n";
  } while (!o.once);
  return 0;
}

int cmd_pneumo_plot(const Options& o) {
  const Config cfg = resolve_config(o.config_path);
  const auto trace = phase_trace(cfg.materials().at(o.material), cfg.pneumatics, o.close_s, o.open_s, o.suction_s,
                                 o.sample_dt);
  std::cout << "t_s,phase,pressure_kpa,force_n\n";
  for (const auto& s : trace) {
    char line[128];
    std::snprintf(line, sizeof line, "%.4f,%s,%.4f,%.4f\n", s.t_s, s.phase.c_str(), s.pressure_kpa, s.force_n);
    std::cout << line;
  }
  return 0;
}

json trial_json(const harness::TrialResult& r) {
  json j = {{"task", r.task},
            {"seed", r.seed},
            {"success", r.success},
            {"cause", std::string(harness::to_string(r.cause))},
            {"detail", r.detail},
            {"duration_s", r.duration_s},
            {"steps", r.steps}};
  j["error_offset_m"] = r.error_offset_m ? json(*r.error_offset_m) : json(nullptr);
  json outcomes = json::array();
  for (const auto& p : r.outcomes) {
    outcomes.push_back({{"primitive", p.primitive}, {"arm", std::string(sim::to_string(p.arm))}, {"ok", p.ok},
                        {"detail", p.detail}});
  }
  j["primitives"] = outcomes;
  json checks = json::array();
  for (const auto& c : r.checkpoints) checks.push_back({{"goal", c.goal}, {"step", c.step}, {"held", c.held}});
  j["checkpoints"] = checks;
  return j;
}

int cmd_sim_run(const Options& o, bool seed_given) {
  const Config cfg = resolve_config(o.config_path);
  sim::Scene scene = sim::resolve_scene(o.scene, cfg.materials());
  cfg.apply(scene);
  if (scene.task_id < 1 || scene.task_id > 4) throw ConfigError("scene " + o.scene + " names no task (task_id 1..4)");
  const auto task = harness::task_spec(scene.task_id, scene);
  harness::TrialOptions opts;
  opts.policy = harness::policy_from_string(o.policy);
  opts.jitter = o.jitter;
  opts.record = !o.out.empty();
  opts.max_duration_s = cfg.max_episode_s;
  const auto result = harness::run_trial(task, seed_given ? o.seed : cfg.seed, opts);
  if (result.episode && !o.out.empty()) data::write_episode(o.out, *result.episode);
  json j = trial_json(result);
  if (!o.out.empty()) j["episode"] = o.out;
  print_json(j);
  return 0;
}

int cmd_harness_run(const Options& o, bool trials_given, bool seed_given) {
  const Config cfg = resolve_config(o.config_path);
  const std::vector<int> tasks = o.tasks.empty() ? std::vector<int>{1, 2, 3, 4} : o.tasks;
  const std::vector<std::string> policies = o.policies.empty() ? std::vector<std::string>{"scripted"} : o.policies;
  const int trials = trials_given ? o.trials : cfg.trials;
  const std::uint64_t seed_base = seed_given ? o.seed_base : cfg.seed;

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) throw Error("cannot write " + o.out);
  }
  std::ostream& csv = o.out.empty() ? std::cout : file;
  // Summaries go to stdout when the CSV has its own file.
  std::ostream& summary = o.out.empty() ? std::cerr : std::cout;

  harness::write_csv_header(csv);
  std::vector<harness::SuiteResult> suites;
  for (const auto& name : policies) {
    harness::TrialOptions opts;
    opts.policy = harness::policy_from_string(name);
    opts.jitter = o.jitter;
    opts.max_duration_s = cfg.max_episode_s;
    for (int t : tasks) {
      if (t < 1 || t > 4) throw RangeError("task must be 1..4");
      const auto spec = harness::task_spec(t, cfg.task_scene(t));
      suites.push_back(harness::run_suite(spec, trials, seed_base, opts));
      harness::write_csv_rows(csv, suites.back().trials);
      csv.flush();
      summary << harness::summary_line(suites.back()) << "\n";
    }
  }
  if (suites.size() > 1) summary << harness::results_table(suites);
  return 0;
}

int cmd_data_stats(const Options& o) {
  std::vector<data::Episode> dataset;
  for (const auto& p : data::list_episodes(o.path)) dataset.push_back(data::read_episode(p));
  if (dataset.empty()) throw EmptyEpisode("no episodes in " + o.path);
  json j = data::to_json(data::toggle_sparsity(dataset, o.horizon, o.stride));
  j["episodes"] = dataset.size();
  j["horizon"] = o.horizon;
  j["stride"] = o.stride == 0 ? o.horizon : o.stride;
  print_json(j);
  return 0;
}

int cmd_data_validate(const Options& o) {
  try {
    const auto ep = data::read_episode(o.path);
    data::validate_episode(ep);
    print_json({{"file", o.path}, {"valid", true}, {"steps", ep.steps.size()}, {"task_id", ep.meta.task_id}});
    return 0;
  } catch (const CorruptRecord& e) {
    print_json({{"file", o.path}, {"valid", false}, {"step", e.index()}, {"error", e.what()}});
    throw;
  } catch (const ValidationError& e) {
    print_json({{"file", o.path}, {"valid", false}, {"step", e.index()}, {"error", e.what()}});
    throw;
  }
}

int cmd_serve(const Options& o, bool port_given, bool rate_given) {
  const Config cfg = resolve_config(o.config_path);
  sim::Scene scene = sim::resolve_scene(o.scene, cfg.materials());
  cfg.apply(scene);
  if (rate_given) {
    if (o.rate <= 0) throw RangeError("rate must be positive");
    scene.params.rate_hz = o.rate;
  }
  teleop::ServerOptions sopts;
  sopts.address = o.address;
  sopts.port = static_cast<unsigned short>(port_given ? o.port : cfg.port);
  sopts.static_dir = o.static_dir.empty() ? cfg.static_dir : o.static_dir;
  teleop::SessionOptions session_opts;
  session_opts.display_hz = cfg.display_hz;
  session_opts.max_episode_s = cfg.max_episode_s;
  session_opts.episode_dir = o.episode_dir.empty() ? cfg.episode_dir : o.episode_dir;

  // Signals are taken by a dedicated thread so the server stops cleanly.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  teleop::Server server(sopts, [scene, session_opts](const std::string& id) {
    return std::make_unique<teleop::Session>(id, scene, session_opts);
  });
  print_json({{"listening", sopts.address + ":" + std::to_string(server.port())}, {"rate_hz", scene.params.rate_hz}});
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    std::cerr << "stopping on signal " << sig << "\n";
    server.stop();
  });
  server.run();
  // Wake the waiter if the server stopped on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vacgrip: hybrid suction gripper emulation, simulation and data tools"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "JSON config file (default: $VACGRIP_CONFIG)");

  auto* device = app.add_subcommand("device", "Expose an emulated suction controller over TCP");
  device->add_option("--channel", o.channel, "Controller channel")->check(CLI::IsMember({"left", "right"}));
  device->add_option("--listen", o.listen, "host:port to listen on (port 0 picks one)");
  device->add_option("--material", o.device_material, "Surface under the cups");
  device->add_flag("--once", o.once, "Exit after the first connection closes");

  auto* pneumo = app.add_subcommand("pneumo", "Pneumatic model tools");
  pneumo->require_subcommand(1);
  auto* plot = pneumo->add_subcommand("plot", "CSV trace of the close/open/suction phases");
  plot->add_option("--material", o.material, "Material name from the table");
  plot->add_option("--close", o.close_s, "Seconds in the close phase")->check(CLI::NonNegativeNumber);
  plot->add_option("--open", o.open_s, "Seconds in the open phase")->check(CLI::NonNegativeNumber);
  plot->add_option("--suction", o.suction_s, "Seconds in the suction phase")->check(CLI::NonNegativeNumber);
  plot->add_option("--dt", o.sample_dt, "Sample period in seconds")->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("sim", "Simulation tools");
  sim->require_subcommand(1);
  auto* sim_run = sim->add_subcommand("run", "Run one trial on a scene and print the result as JSON");
  sim_run->add_option("--scene", o.scene, "Scene file or built-in name (task1.scene ... task4.scene)");
  sim_run->add_option("--policy", o.policy, "scripted, grasp-only or frozen")
      ->check(CLI::IsMember({"scripted", "grasp-only", "frozen"}));
  auto* sim_seed = sim_run->add_option("--seed", o.seed, "Trial seed");
  sim_run->add_flag("--jitter", o.jitter, "Perturb initial object poses from the seed");
  sim_run->add_option("--out", o.out, "Write the executed episode here");

  auto* harness = app.add_subcommand("harness", "Evaluation harness");
  harness->require_subcommand(1);
  auto* harness_run = harness->add_subcommand("run", "Run task suites and emit a results CSV");
  harness_run->add_option("--task", o.tasks, "Task id 1..4, repeatable (default: all)")->check(CLI::Range(1, 4));
  auto* trials = harness_run->add_option("--trials", o.trials, "Trials per task")->check(CLI::PositiveNumber);
  auto* seed_base = harness_run->add_option("--seed-base", o.seed_base, "Seed of the first trial");
  harness_run->add_option("--policy", o.policies, "scripted, grasp-only or frozen; repeatable")
      ->check(CLI::IsMember({"scripted", "grasp-only", "frozen"}));
  harness_run->add_flag("--jitter", o.jitter, "Perturb initial object poses per seed");
  harness_run->add_option("--out", o.out, "CSV path (default: stdout)");

  auto* data_cmd = app.add_subcommand("data", "Episode dataset tools");
  data_cmd->require_subcommand(1);
  auto* stats = data_cmd->add_subcommand("stats", "Suction toggle sparsity over a directory of episodes");
  stats->add_option("dir", o.path, "Directory of .ep files")->required();
  stats->add_option("--horizon", o.horizon, "Chunk length")->check(CLI::PositiveNumber);
  stats->add_option("--stride", o.stride, "Chunk start spacing (default: horizon)")->check(CLI::NonNegativeNumber);
  auto* validate = data_cmd->add_subcommand("validate", "Check one episode file");
  validate->add_option("file", o.path, "Episode file")->required();

  auto* serve = app.add_subcommand("serve", "Run the teleoperation server");
  serve->add_option("--scene", o.scene, "Scene file or built-in name");
  auto* port = serve->add_option("--port", o.port, "TCP port (0 picks one)")->check(CLI::Range(0, 65535));
  auto* rate = serve->add_option("--rate", o.rate, "Sim and recording rate in Hz")->check(CLI::PositiveNumber);
  serve->add_option("--address", o.address, "Listen address");
  serve->add_option("--static", o.static_dir, "Directory with the UI bundle");
  serve->add_option("--episodes", o.episode_dir, "Where saved episodes go");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*device) return cmd_device(o);
    if (*plot) return cmd_pneumo_plot(o);
    if (*sim_run) return cmd_sim_run(o, sim_seed->count() > 0);
    if (*harness_run) return cmd_harness_run(o, trials->count() > 0, seed_base->count() > 0);
    if (*stats) return cmd_data_stats(o);
    if (*validate) return cmd_data_validate(o);
    if (*serve) return cmd_serve(o, port->count() > 0, rate->count() > 0);
  } catch (const vacgrip::Error& e) {
    std::cerr << "vacgrip: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "vacgrip: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

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
 * HTTP and WebSocket front end for teleop sessions.
 *
 *   GET /...              static files from static_dir (a stub page if unset)
 *   WS  /session/{id}     first connection drives, later ones watch
 *
 * Server messages are JSON text frames tagged by "type": hello, ack,
 * snapshot, error. Driver messages are teleop inputs (see teleop.hpp).
 */

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "vacgrip/teleop.hpp"

namespace vacgrip::teleop {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::string static_dir;
  /// How often each connection drains its snapshot queue.
  std::chrono::milliseconds frame_poll{25};
};

using SessionFactory = std::function<std::unique_ptr<Session>(const std::string& id)>;

class Server {
 public:
  /// Binds immediately; throws Error if the address is unavailable.
  Server(ServerOptions opts, SessionFactory factory);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  /// Serves until stop(); sessions tick on their own threads.
  void run();
  /// Safe to call from any thread or a signal-driven callback.
  void stop();

  /// The session for `id`, created and started on first use.
  std::shared_ptr<Session> session(const std::string& id);

  struct Impl;  // connection handlers reach it from the .cpp

 private:
  std::unique_ptr<Impl> impl_;
};

/// "/session/abc" -> "abc"; empty if the target is not a session path.
std::string session_id_from_target(const std::string& target);

/// Maps a request target onto a file under `root`, refusing escapes.
/// Empty when the target is unsafe.
std::string static_path(const std::string& root, const std::string& target);

}  // namespace vacgrip::teleop

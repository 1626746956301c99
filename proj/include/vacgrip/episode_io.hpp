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
 * Episode files: UTF-8, one JSON record per line. The first record is the
 * header
 *
 *   {"format": "vacgrip.episode", "version": 1, "task_id": 3,
 *    "instruction": "...", "rate_hz": 30, "arm": "right", "seed": 0,
 *    "layout": [16 names], "proprio_layout": [14 names],
 *    "initial_scene": {...} | null}
 *
 * and every following record is one step
 *
 *   {"t": 0.0, "proprio": [14], "action": [16], "pressure": [2],
 *    "subtask": "..." (optional), "image_refs": [...] (optional)}
 *
 * Numbers are written with round-trip precision so a read returns the exact
 * doubles that were written.
 */

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vacgrip/action_data.hpp"

namespace vacgrip::data {

inline constexpr int kEpisodeVersion = 1;
inline constexpr const char* kEpisodeFormat = "vacgrip.episode";

nlohmann::json header_record(const EpisodeMeta& meta);
nlohmann::json step_record(const EpisodeStep& step);

/// Appends records as they are produced; the file is valid after every step.
class EpisodeWriter {
 public:
  EpisodeWriter(const std::filesystem::path& path, const EpisodeMeta& meta);
  void append(const EpisodeStep& step);
  void close();

 private:
  std::ofstream out_;
};

void write_episode(const std::filesystem::path& path, const Episode& ep);

/// Throws SchemaVersionMismatch for any version other than 1 and
/// CorruptRecord (with step index) for unparsable or invalid records.
Episode read_episode(const std::filesystem::path& path);
Episode parse_episode(std::istream& in);

/// Every *.ep file directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_episodes(const std::filesystem::path& dir);

}  // namespace vacgrip::data

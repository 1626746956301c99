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

#include "vacgrip/episode_io.hpp"

#include <algorithm>

#include "vacgrip/errors.hpp"

namespace vacgrip::data {

using nlohmann::json;

namespace {

template <typename Vec>
json to_array(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::vector<double> numbers(const json& j, const char* key) {
  const json& a = j.at(key);
  if (!a.is_array()) throw std::invalid_argument(std::string(key) + " is not an array");
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& x : a) {
    if (!x.is_number()) throw std::invalid_argument(std::string(key) + " holds a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

EpisodeStep parse_step(const json& rec) {
  EpisodeStep s;
  s.t = rec.at("t").get<double>();
  s.proprio = ProprioState::from_values(numbers(rec, "proprio"));
  s.action = ActionVector::from_values(numbers(rec, "action"));
  const auto p = numbers(rec, "pressure");
  if (p.size() != 2) throw DimensionError("pressure needs 2 values, got " + std::to_string(p.size()));
  s.pressure_kpa = {p[0], p[1]};
  if (rec.contains("subtask") && !rec["subtask"].is_null()) s.subtask = rec["subtask"].get<std::string>();
  if (rec.contains("image_refs")) s.image_refs = rec["image_refs"].get<std::vector<std::string>>();
  return s;
}

EpisodeMeta parse_header(const json& h) {
  if (!h.is_object() || h.value("format", "") != kEpisodeFormat) {
    throw CorruptRecord(-1, "missing episode header");
  }
  const int version = h.at("version").get<int>();
  if (version != kEpisodeVersion) {
    throw SchemaVersionMismatch("episode schema version " + std::to_string(version) + " is not supported (reader is v" +
                                std::to_string(kEpisodeVersion) + ")");
  }
  if (h.at("layout").get<std::vector<std::string>>().size() != kActionDim ||
      h.at("proprio_layout").get<std::vector<std::string>>().size() != kProprioDim) {
    throw CorruptRecord(-1, "header layout does not describe 16 action / 14 proprio entries");
  }
  EpisodeMeta m;
  m.task_id = h.at("task_id").get<int>();
  m.instruction = h.at("instruction").get<std::string>();
  m.rate_hz = h.at("rate_hz").get<double>();
  m.arm = h.value("arm", "both");
  m.seed = h.value("seed", std::uint64_t{0});
  if (h.contains("initial_scene")) m.initial_scene = h["initial_scene"];
  return m;
}

}  // namespace

json header_record(const EpisodeMeta& meta) {
  return json{{"format", kEpisodeFormat},
              {"version", kEpisodeVersion},
              {"task_id", meta.task_id},
              {"instruction", meta.instruction},
              {"rate_hz", meta.rate_hz},
              {"arm", meta.arm},
              {"seed", meta.seed},
              {"layout", action_layout()},
              {"proprio_layout", proprio_layout()},
              {"initial_scene", meta.initial_scene}};
}

json step_record(const EpisodeStep& step) {
  json r{{"t", step.t},
         {"proprio", to_array(step.proprio.values())},
         {"action", to_array(step.action.values())},
         {"pressure", {step.pressure_kpa[0], step.pressure_kpa[1]}}};
  if (step.subtask) r["subtask"] = *step.subtask;
  if (!step.image_refs.empty()) r["image_refs"] = step.image_refs;
  return r;
}

EpisodeWriter::EpisodeWriter(const std::filesystem::path& path, const EpisodeMeta& meta) : out_(path) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  out_ << header_record(meta).dump() << '\n';
}

void EpisodeWriter::append(const EpisodeStep& step) { out_ << step_record(step).dump() << '\n' << std::flush; }

void EpisodeWriter::close() {
  out_.flush();
  out_.close();
}

void write_episode(const std::filesystem::path& path, const Episode& ep) {
  validate_episode(ep);
  EpisodeWriter w(path, ep.meta);
  for (const auto& s : ep.steps) w.append(s);
  w.close();
}

Episode parse_episode(std::istream& in) {
  Episode ep;
  std::string line;
  if (!std::getline(in, line)) throw CorruptRecord(-1, "empty file");
  try {
    ep.meta = parse_header(json::parse(line));
  } catch (const json::exception& e) {
    throw CorruptRecord(-1, e.what());
  }

  long index = 0;
  while (std::getline(in, line)) {
    if (line.empty() && in.eof()) break;
    try {
      ep.steps.push_back(parse_step(json::parse(line)));
    } catch (const json::exception& e) {
      throw CorruptRecord(index, e.what());
    } catch (const std::invalid_argument& e) {
      throw CorruptRecord(index, e.what());
    } catch (const DimensionError& e) {
      throw CorruptRecord(index, e.what());
    } catch (const DomainError& e) {
      throw CorruptRecord(index, e.what());
    }
    ++index;
  }
  try {
    validate_episode(ep);
  } catch (const ValidationError& e) {
    throw CorruptRecord(e.index(), e.what());
  }
  return ep;
}

Episode read_episode(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_episode(in);
}

std::vector<std::filesystem::path> list_episodes(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ep") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace vacgrip::data

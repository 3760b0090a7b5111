// Copyright 2026 The decode_lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "decode_lab/config.hpp"
#include "decode_lab/decoding.hpp"
#include "decode_lab/error.hpp"

namespace decode_lab {

inline constexpr int kRunSchemaVersion = 1;

/// One generation inside a comparison run, plus the metrics computed on it.
struct RunRecord {
  std::string run_id;
  std::int64_t timestamp = 0;  // UTC seconds
  std::string model;
  std::string strategy;
  GenerationConfig config;
  std::string prompt;
  std::size_t prompt_index = 0;
  std::size_t sample_index = 0;
  std::optional<GenerationResult> result;
  std::map<std::string, double> metrics;
  std::size_t floored_steps = 0;
  /// Metrics that could not be computed for this record, with the reason.
  std::map<std::string, std::string> skipped_metrics;
  std::optional<std::string> error;

  bool ok() const noexcept { return !error.has_value(); }
  bool operator==(const RunRecord&) const = default;
};

inline void to_json(nlohmann::json& j, const Candidate& c) {
  j = {{"seq", c.seq},
       {"cum_logprob", c.cum_logprob},
       {"finished", c.finished},
       {"step_probs", c.step_probs},
       {"fallback_steps", c.fallback_steps}};
}

inline void from_json(const nlohmann::json& j, Candidate& c) {
  j.at("seq").get_to(c.seq);
  j.at("cum_logprob").get_to(c.cum_logprob);
  j.at("finished").get_to(c.finished);
  j.at("step_probs").get_to(c.step_probs);
  j.at("fallback_steps").get_to(c.fallback_steps);
}

inline void to_json(nlohmann::json& j, const GenerationResult& r) {
  j = {{"prompt", r.prompt},         {"output", r.output}, {"step_probs", r.step_probs},
       {"strategy", r.strategy},     {"config", r.config}, {"fallback_steps", r.fallback_steps},
       {"text", r.text},             {"beams", r.beams}};
}

inline void from_json(const nlohmann::json& j, GenerationResult& r) {
  j.at("prompt").get_to(r.prompt);
  j.at("output").get_to(r.output);
  j.at("step_probs").get_to(r.step_probs);
  j.at("strategy").get_to(r.strategy);
  j.at("config").get_to(r.config);
  j.at("fallback_steps").get_to(r.fallback_steps);
  j.at("text").get_to(r.text);
  j.at("beams").get_to(r.beams);
}

inline void to_json(nlohmann::json& j, const RunRecord& r) {
  j = {{"schema", kRunSchemaVersion},
       {"run_id", r.run_id},
       {"timestamp", r.timestamp},
       {"model", r.model},
       {"strategy", r.strategy},
       {"config", r.config},
       {"prompt", r.prompt},
       {"prompt_index", r.prompt_index},
       {"sample_index", r.sample_index},
       {"result", r.result ? nlohmann::json(*r.result) : nlohmann::json(nullptr)},
       {"metrics", r.metrics},
       {"floored_steps", r.floored_steps},
       {"skipped_metrics", r.skipped_metrics},
       {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)}};
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
  j.at("run_id").get_to(r.run_id);
  j.at("timestamp").get_to(r.timestamp);
  j.at("model").get_to(r.model);
  j.at("strategy").get_to(r.strategy);
  j.at("config").get_to(r.config);
  j.at("prompt").get_to(r.prompt);
  j.at("prompt_index").get_to(r.prompt_index);
  j.at("sample_index").get_to(r.sample_index);
  if (j.at("result").is_null()) {
    r.result.reset();
  } else {
    r.result = j.at("result").get<GenerationResult>();
  }
  j.at("metrics").get_to(r.metrics);
  j.at("floored_steps").get_to(r.floored_steps);
  j.at("skipped_metrics").get_to(r.skipped_metrics);
  if (j.at("error").is_null()) {
    r.error.reset();
  } else {
    r.error = j.at("error").get<std::string>();
  }
}

/// Writes one JSON object per line, each tagged `schema: 1`.
inline void persist_runs(std::span<const RunRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path);
  for (const auto& r : records) out << nlohmann::json(r).dump() << '\n';
  out.flush();
  if (!out) throw Error(Errc::kIoError, "write failed for " + path);
}

inline std::vector<RunRecord> load_runs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot read " + path);
  std::vector<RunRecord> records;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::kParseError, where + ": malformed or truncated record (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("schema")) {
      throw Error(Errc::kParseError, where + ": record has no schema field");
    }
    if (j["schema"] != kRunSchemaVersion) {
      throw Error(Errc::kSchemaMismatch, where + ": schema " + j["schema"].dump() + ", expected " +
                                             std::to_string(kRunSchemaVersion));
    }
    try {
      records.push_back(j.get<RunRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParseError, where + ": " + e.what());
    }
  }
  return records;
}

}  // namespace decode_lab

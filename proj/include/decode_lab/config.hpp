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
#include <string>

#include <nlohmann/json.hpp>

#include "decode_lab/error.hpp"

namespace decode_lab {

/// Every generation knob. Defaults follow the reference GPT-2 snippets
/// (top_p=0.9, max_length=200, penalty_alpha=0.9, top_k=40, typical_p=0.95,
/// no_repeat_ngram_size=2).
struct GenerationConfig {
  std::size_t max_length = 200;  // emitted tokens, prompt excluded
  std::size_t num_beams = 3;
  std::size_t top_k = 40;        // 0 disables
  double top_p = 0.9;
  double typical_p = 0.95;
  double temperature = 1.0;
  double penalty_alpha = 0.9;
  std::size_t candidate_k = 4;
  std::size_t no_repeat_ngram_size = 2;  // 0 disables
  bool do_sample = false;
  std::uint64_t seed = 0;

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(Errc::kInvalidConfig, what); };
    if (num_beams < 1) fail("num_beams must be >= 1");
    if (!(top_p > 0.0 && top_p <= 1.0)) fail("top_p must be in (0, 1]");
    if (!(typical_p > 0.0 && typical_p <= 1.0)) fail("typical_p must be in (0, 1]");
    if (!(temperature > 0.0)) fail("temperature must be > 0");
    if (!(penalty_alpha >= 0.0 && penalty_alpha <= 1.0)) fail("penalty_alpha must be in [0, 1]");
    if (candidate_k < 1) fail("candidate_k must be >= 1");
  }

  bool operator==(const GenerationConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const GenerationConfig& c) {
  j = {{"max_length", c.max_length},
       {"num_beams", c.num_beams},
       {"top_k", c.top_k},
       {"top_p", c.top_p},
       {"typical_p", c.typical_p},
       {"temperature", c.temperature},
       {"penalty_alpha", c.penalty_alpha},
       {"candidate_k", c.candidate_k},
       {"no_repeat_ngram_size", c.no_repeat_ngram_size},
       {"do_sample", c.do_sample},
       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, GenerationConfig& c) {
  j.at("max_length").get_to(c.max_length);
  j.at("num_beams").get_to(c.num_beams);
  j.at("top_k").get_to(c.top_k);
  j.at("top_p").get_to(c.top_p);
  j.at("typical_p").get_to(c.typical_p);
  j.at("temperature").get_to(c.temperature);
  j.at("penalty_alpha").get_to(c.penalty_alpha);
  j.at("candidate_k").get_to(c.candidate_k);
  j.at("no_repeat_ngram_size").get_to(c.no_repeat_ngram_size);
  j.at("do_sample").get_to(c.do_sample);
  j.at("seed").get_to(c.seed);
}

}  // namespace decode_lab

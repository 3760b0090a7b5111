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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "decode_lab/config.hpp"
#include "decode_lab/decoding.hpp"
#include "decode_lab/error.hpp"
#include "decode_lab/language_model.hpp"
#include "decode_lab/metrics.hpp"
#include "decode_lab/prompts.hpp"
#include "decode_lab/rng.hpp"
#include "decode_lab/run_record.hpp"

namespace decode_lab {

struct ComparisonOptions {
  std::vector<std::string> strategies;
  /// Samples per prompt for sampling strategies; deterministic strategies always run once.
  std::size_t samples_per_prompt = 8;
  /// Worker threads; 0 picks the hardware concurrency. Output never depends on it.
  std::size_t threads = 1;
};

namespace detail {

inline std::string fresh_run_prefix() {
  std::random_device rd;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%08x%08x", rd(), rd());
  return buf;
}

template <class F>
void record_metric(RunRecord& rec, const std::string& name, F&& compute) {
  try {
    rec.metrics[name] = compute();
  } catch (const Error& e) {
    rec.skipped_metrics[name] = e.what();
  }
}

template <NextTokenModel M>
std::vector<RunRecord> run_group(const M& model, Strategy strategy, const std::string& prompt,
                                 std::size_t prompt_index, std::size_t samples,
                                 const GenerationConfig& cfg, const std::string& model_name) {
  std::vector<RunRecord> out;
  for (std::size_t s = 0; s < samples; ++s) {
    RunRecord rec;
    rec.model = model_name;
    rec.strategy = std::string(strategy_name(strategy));
    rec.config = cfg;
    rec.prompt = prompt;
    rec.prompt_index = prompt_index;
    rec.sample_index = s;
    try {
      Rng rng = Rng::stream(cfg.seed, prompt_index, s);
      GenerationResult result = decode(model, tokenize(prompt, model.vocab()), strategy, cfg, rng);
      record_metric(rec, "perplexity", [&] {
        auto ppl = perplexity_of(model, std::span<const TokenId>(result.prompt),
                                 std::span<const TokenId>(result.output));
        rec.floored_steps = ppl.floored_steps;
        return ppl.value;
      });
      const std::vector<std::string> pool{result.text};
      record_metric(rec, "distinct1", [&] { return distinct_n(pool, 1); });
      record_metric(rec, "distinct2", [&] { return distinct_n(pool, 2); });
      record_metric(rec, "entropy", [&] { return token_entropy(pool); });
      rec.result = std::move(result);
    } catch (const Error& e) {
      rec.error = e.what();
    }
    out.push_back(std::move(rec));
  }

  // Group metrics live on the first record of the group.
  std::vector<std::string> texts;
  for (const auto& r : out) {
    if (r.ok()) texts.push_back(r.result->text);
  }
  if (samples >= 2 && !out.empty() && out.front().ok()) {
    record_metric(out.front(), "self_bleu", [&] { return self_metric(texts, SelfBase::kBleu); });
    record_metric(out.front(), "self_rouge", [&] { return self_metric(texts, SelfBase::kRougeL); });
  }
  return out;
}

}  // namespace detail

/// Generates every (strategy, prompt, sample) combination and attaches
/// per-generation metrics (perplexity of the continuation given the prompt,
/// distinct-1/2, entropy) and per-group self_bleu/self_rouge. Records are
/// ordered strategy-major, then prompt, then sample, and are identical for any
/// thread count except for run_id and timestamp.
template <NextTokenModel M>
std::vector<RunRecord> run_comparison(const M& model, const std::string& model_name,
                                      const PromptSet& prompts, const GenerationConfig& cfg,
                                      const ComparisonOptions& options) {
  if (options.strategies.empty()) throw Error(Errc::kInvalidArgument, "no strategies given");
  if (options.samples_per_prompt < 1) throw Error(Errc::kInvalidArgument, "samples must be >= 1");
  if (prompts.prompts.empty()) throw Error(Errc::kEmptyPromptSet, "no prompts");
  cfg.validate();
  std::vector<Strategy> strategies;
  for (const auto& name : options.strategies) strategies.push_back(parse_strategy(name));

  struct Job {
    Strategy strategy;
    std::size_t prompt_index;
  };
  std::vector<Job> jobs;
  for (Strategy s : strategies) {
    for (std::size_t p = 0; p < prompts.prompts.size(); ++p) jobs.push_back({s, p});
  }
  std::vector<std::vector<RunRecord>> results(jobs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      const std::size_t samples = is_deterministic(job.strategy) ? 1 : options.samples_per_prompt;
      results[i] = detail::run_group(model, job.strategy, prompts.prompts[job.prompt_index],
                                     job.prompt_index, samples, cfg, model_name);
    }
  };
  std::size_t threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                             : options.threads;
  threads = std::min(threads, jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  const std::string prefix = detail::fresh_run_prefix();
  const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  std::vector<RunRecord> records;
  for (auto& group : results) {
    for (auto& r : group) {
      r.run_id = prefix + "-" + std::to_string(records.size());
      r.timestamp = now;
      records.push_back(std::move(r));
    }
  }
  return records;
}

}  // namespace decode_lab

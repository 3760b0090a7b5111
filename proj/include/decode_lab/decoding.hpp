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
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "decode_lab/config.hpp"
#include "decode_lab/distribution.hpp"
#include "decode_lab/error.hpp"
#include "decode_lab/language_model.hpp"
#include "decode_lab/rng.hpp"
#include "decode_lab/transforms.hpp"
#include "decode_lab/vocabulary.hpp"

namespace decode_lab {

enum class Strategy { kGreedy, kBeam, kTopK, kTopP, kTypical, kContrastive };

inline constexpr std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kGreedy: return "greedy";
    case Strategy::kBeam: return "beam";
    case Strategy::kTopK: return "top_k";
    case Strategy::kTopP: return "top_p";
    case Strategy::kTypical: return "typical";
    case Strategy::kContrastive: return "contrastive";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view name) {
  for (auto s : {Strategy::kGreedy, Strategy::kBeam, Strategy::kTopK, Strategy::kTopP,
                 Strategy::kTypical, Strategy::kContrastive}) {
    if (strategy_name(s) == name) return s;
  }
  throw Error(Errc::kUnknownStrategy, "'" + std::string(name) +
                                          "' (expected greedy, beam, top_k, top_p, typical or contrastive)");
}

/// Strategies whose output does not depend on the seed.
inline constexpr bool is_deterministic(Strategy s) {
  return s == Strategy::kGreedy || s == Strategy::kBeam || s == Strategy::kContrastive;
}

/// A beam hypothesis. `seq` holds generated tokens only (prompt excluded).
struct Candidate {
  TokenSeq seq;
  double cum_logprob = 0.0;
  bool finished = false;
  std::vector<double> step_probs;
  std::vector<std::size_t> fallback_steps;

  bool operator==(const Candidate&) const = default;
};

struct GenerationResult {
  TokenSeq prompt;
  TokenSeq output;
  std::vector<double> step_probs;
  std::string strategy;
  GenerationConfig config;
  /// Steps at which the n-gram ban would have removed every token and was skipped.
  std::vector<std::size_t> fallback_steps;
  /// Detokenized continuation (special tokens dropped).
  std::string text;
  /// Final beam, best first (beam search only).
  std::vector<Candidate> beams;

  bool operator==(const GenerationResult&) const = default;
};

namespace detail {

struct ShapedStep {
  Distribution dist;
  bool fallback = false;
};

// temperature -> n-gram ban; the shared front half of every strategy's step.
template <NextTokenModel M>
ShapedStep shaped_step(const M& model, std::span<const TokenId> context, const GenerationConfig& cfg) {
  Distribution d = model.next_distribution(context);
  d = apply_temperature(d, cfg.temperature);
  auto ban = ban_repeating_ngrams_checked(d, context, cfg.no_repeat_ngram_size);
  return {std::move(ban.dist), ban.fallback};
}

inline GenerationResult start_result(const TokenSeq& prompt, Strategy s, const GenerationConfig& cfg) {
  GenerationResult r;
  r.prompt = prompt;
  r.strategy = std::string(strategy_name(s));
  r.config = cfg;
  return r;
}

template <NextTokenModel M>
void finish_result(const M& model, GenerationResult& r) {
  r.text = detokenize(r.output, model.vocab());
}

}  // namespace detail

/// Appends the most probable token (after temperature and n-gram ban) until
/// `<eos>` or max_length.
template <NextTokenModel M>
GenerationResult greedy_decode(const M& model, const TokenSeq& prompt, const GenerationConfig& cfg) {
  auto r = detail::start_result(prompt, Strategy::kGreedy, cfg);
  TokenSeq context = prompt;
  const TokenId eos = model.vocab().eos_id();
  for (std::size_t step = 0; step < cfg.max_length; ++step) {
    auto shaped = detail::shaped_step(model, context, cfg);
    if (shaped.fallback) r.fallback_steps.push_back(step);
    TokenId id = shaped.dist.argmax();
    r.output.push_back(id);
    r.step_probs.push_back(shaped.dist.probs[id]);
    context.push_back(id);
    if (id == eos) break;
  }
  detail::finish_result(model, r);
  return r;
}

namespace detail {

// Higher score first; equal scores fall back to lexicographic token ids.
inline bool beam_before(const Candidate& a, const Candidate& b) {
  if (a.cum_logprob != b.cum_logprob) return a.cum_logprob > b.cum_logprob;
  return a.seq < b.seq;
}

}  // namespace detail

/// Keeps the num_beams best hypotheses by cumulative log-probability. Finished
/// hypotheses are carried forward unchanged; the search stops at max_length or
/// once every hypothesis has emitted `<eos>`.
template <NextTokenModel M>
GenerationResult beam_decode(const M& model, const TokenSeq& prompt, const GenerationConfig& cfg) {
  if (cfg.num_beams < 1) throw Error(Errc::kInvalidConfig, "num_beams must be >= 1");
  auto r = detail::start_result(prompt, Strategy::kBeam, cfg);
  const TokenId eos = model.vocab().eos_id();

  std::vector<Candidate> beams(1);
  TokenSeq context;
  // An expansion is (parent beam, appended token or none for a carried finished beam, score).
  struct Expansion {
    std::size_t parent;
    std::optional<TokenId> token;
    double score;
    double prob;
    bool fallback;
  };
  for (std::size_t step = 0; step < cfg.max_length; ++step) {
    if (std::all_of(beams.begin(), beams.end(), [](const Candidate& c) { return c.finished; })) break;
    std::vector<Expansion> pool;
    for (std::size_t b = 0; b < beams.size(); ++b) {
      const Candidate& beam = beams[b];
      if (beam.finished) {
        pool.push_back({b, std::nullopt, beam.cum_logprob, 1.0, false});
        continue;
      }
      context = prompt;
      context.insert(context.end(), beam.seq.begin(), beam.seq.end());
      auto shaped = detail::shaped_step(model, context, cfg);
      for (std::size_t id = 0; id < shaped.dist.size(); ++id) {
        const double p = shaped.dist.probs[id];
        if (!(p > 0.0)) continue;
        pool.push_back({b, static_cast<TokenId>(id), beam.cum_logprob + std::log(p), p, shaped.fallback});
      }
    }
    // Same order as beam_before on the materialized candidates.
    auto before = [&](const Expansion& x, const Expansion& y) {
      if (x.score != y.score) return x.score > y.score;
      const TokenSeq& sx = beams[x.parent].seq;
      const TokenSeq& sy = beams[y.parent].seq;
      const std::size_t lx = sx.size() + (x.token ? 1 : 0);
      const std::size_t ly = sy.size() + (y.token ? 1 : 0);
      for (std::size_t i = 0; i < std::min(lx, ly); ++i) {
        const TokenId ax = i < sx.size() ? sx[i] : *x.token;
        const TokenId ay = i < sy.size() ? sy[i] : *y.token;
        if (ax != ay) return ax < ay;
      }
      return lx < ly;
    };
    const std::size_t keep = std::min(cfg.num_beams, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), before);
    std::vector<Candidate> next;
    next.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const Expansion& e = pool[i];
      Candidate c = beams[e.parent];
      if (e.token) {
        c.seq.push_back(*e.token);
        c.cum_logprob = e.score;
        c.step_probs.push_back(e.prob);
        if (e.fallback) c.fallback_steps.push_back(step);
        c.finished = *e.token == eos;
      }
      next.push_back(std::move(c));
    }
    beams = std::move(next);
  }
  std::sort(beams.begin(), beams.end(), detail::beam_before);

  const Candidate& best = beams.front();
  r.output = best.seq;
  r.step_probs = best.step_probs;
  r.fallback_steps = best.fallback_steps;
  r.beams = std::move(beams);
  detail::finish_result(model, r);
  return r;
}

namespace detail {

// temperature -> n-gram ban -> truncation -> inverse-CDF sample.
template <NextTokenModel M, class Truncate>
GenerationResult sample_decode(const M& model, const TokenSeq& prompt, const GenerationConfig& cfg,
                               Strategy strategy, Rng& rng, Truncate&& truncate) {
  auto r = start_result(prompt, strategy, cfg);
  TokenSeq context = prompt;
  const TokenId eos = model.vocab().eos_id();
  for (std::size_t step = 0; step < cfg.max_length; ++step) {
    auto shaped = shaped_step(model, context, cfg);
    if (shaped.fallback) r.fallback_steps.push_back(step);
    Distribution d = truncate(shaped.dist);
    TokenId id = sample_from(d, rng);
    r.output.push_back(id);
    r.step_probs.push_back(d.probs[id]);
    context.push_back(id);
    if (id == eos) break;
  }
  finish_result(model, r);
  return r;
}

}  // namespace detail

/// Samples from the top_k most probable tokens (top_k = 0 leaves the step unfiltered).
template <NextTokenModel M>
GenerationResult top_k_decode(const M& model, const TokenSeq& prompt, const GenerationConfig& cfg,
                              Rng& rng) {
  return detail::sample_decode(model, prompt, cfg, Strategy::kTopK, rng, [&](const Distribution& d) {
    return cfg.top_k == 0 ? d : top_k_filter(d, cfg.top_k);
  });
}

/// Nucleus sampling with threshold top_p.
template <NextTokenModel M>
GenerationResult top_p_decode(const M& model, const TokenSeq& prompt, const GenerationConfig& cfg,
                              Rng& rng) {
  return detail::sample_decode(model, prompt, cfg, Strategy::kTopP, rng,
                               [&](const Distribution& d) { return top_p_filter(d, cfg.top_p); });
}

/// Locally typical sampling with mass typical_p.
template <NextTokenModel M>
GenerationResult typical_decode(const M& model, const TokenSeq& prompt, const GenerationConfig& cfg,
                                Rng& rng) {
  return detail::sample_decode(model, prompt, cfg, Strategy::kTypical, rng,
                               [&](const Distribution& d) { return typical_filter(d, cfg.typical_p); });
}

/// Step-wise contrastive search. Among the candidate_k most probable tokens v,
/// picks the maximum of
///   (1 - alpha) p(v | context) - alpha * max_u cos(e_v, e_u)
/// where u ranges over tokens generated so far (no penalty before the first
/// token). Tokens without an embedding contribute cosine 0.
template <NextTokenModel M>
GenerationResult contrastive_step_decode(const M& model, const TokenSeq& prompt,
                                         const GenerationConfig& cfg) {
  if (!model.has_embeddings()) {
    throw Error(Errc::kMissingEmbeddings, "contrastive decoding needs token embeddings");
  }
  if (cfg.candidate_k < 1) throw Error(Errc::kInvalidConfig, "candidate_k must be >= 1");
  auto r = detail::start_result(prompt, Strategy::kContrastive, cfg);
  const double alpha = cfg.penalty_alpha;
  const TokenId eos = model.vocab().eos_id();

  std::map<TokenId, std::optional<std::vector<double>>> cache;
  auto embed = [&](TokenId id) -> const std::optional<std::vector<double>>& {
    auto it = cache.find(id);
    if (it == cache.end()) it = cache.emplace(id, model.embedding(id)).first;
    return it->second;
  };
  auto cosine = [&](TokenId a, TokenId b) {
    const auto& ea = embed(a);
    const auto& eb = embed(b);
    if (!ea || !eb || ea->size() != eb->size()) return 0.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < ea->size(); ++i) dot += (*ea)[i] * (*eb)[i];
    return dot;
  };

  TokenSeq context = prompt;
  for (std::size_t step = 0; step < cfg.max_length; ++step) {
    auto shaped = detail::shaped_step(model, context, cfg);
    if (shaped.fallback) r.fallback_steps.push_back(step);
    auto pool = detail::by_descending_prob(shaped.dist);
    if (pool.size() > cfg.candidate_k) pool.resize(cfg.candidate_k);

    TokenId best = pool.front();
    double best_score = -INFINITY;
    for (TokenId v : pool) {
      double penalty = 0.0;
      if (!r.output.empty()) {
        penalty = -INFINITY;
        for (TokenId u : r.output) penalty = std::max(penalty, cosine(v, u));
      }
      const double score = (1.0 - alpha) * shaped.dist.probs[v] - alpha * penalty;
      if (score > best_score || (score == best_score && v < best)) {
        best = v;
        best_score = score;
      }
    }
    r.output.push_back(best);
    r.step_probs.push_back(shaped.dist.probs[best]);
    context.push_back(best);
    if (best == eos) break;
  }
  detail::finish_result(model, r);
  return r;
}

/// Runs `strategy` on already-tokenized input. Sampling strategies draw from `rng`.
template <NextTokenModel M>
GenerationResult decode(const M& model, const TokenSeq& prompt, Strategy strategy,
                        const GenerationConfig& cfg, Rng& rng) {
  cfg.validate();
  for (TokenId id : prompt) {
    if (id >= model.vocab().size()) throw Error(Errc::kInvalidArgument, "prompt id out of range");
  }
  switch (strategy) {
    case Strategy::kGreedy: return greedy_decode(model, prompt, cfg);
    case Strategy::kBeam: return beam_decode(model, prompt, cfg);
    case Strategy::kTopK: return top_k_decode(model, prompt, cfg, rng);
    case Strategy::kTopP: return top_p_decode(model, prompt, cfg, rng);
    case Strategy::kTypical: return typical_decode(model, prompt, cfg, rng);
    case Strategy::kContrastive: return contrastive_step_decode(model, prompt, cfg);
  }
  throw Error(Errc::kUnknownStrategy, "unhandled strategy");
}

/// Tokenizes `prompt`, dispatches on the strategy name and detokenizes. The
/// random stream is keyed by (config.seed, stream_index, sample_index).
template <NextTokenModel M>
GenerationResult generate(const M& model, std::string_view prompt, std::string_view strategy,
                          const GenerationConfig& cfg, std::uint64_t stream_index = 0,
                          std::uint64_t sample_index = 0) {
  const Strategy s = parse_strategy(strategy);
  Rng rng = Rng::stream(cfg.seed, stream_index, sample_index);
  return decode(model, tokenize(prompt, model.vocab()), s, cfg, rng);
}

}  // namespace decode_lab

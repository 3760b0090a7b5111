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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "decode_lab/error.hpp"
#include "decode_lab/metrics.hpp"
#include "decode_lab/vocabulary.hpp"

namespace decode_lab {

using SimilarityFn = std::function<double(std::span<const TokenId>, std::span<const TokenId>)>;

/// Cosine between unigram count vectors; 0 when either side is empty.
inline double unigram_cosine(std::span<const TokenId> a, std::span<const TokenId> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::map<TokenId, double> ca, cb;
  for (TokenId t : a) ca[t] += 1.0;
  for (TokenId t : b) cb[t] += 1.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, x] : ca) {
    na += x * x;
    auto it = cb.find(t);
    if (it != cb.end()) dot += x * it->second;
  }
  for (const auto& kv : cb) nb += kv.second * kv.second;
  return dot / std::sqrt(na * nb);
}

/// Sentence BLEU of `a` against the single reference `b`; 0 when either side is empty.
inline double bleu_similarity(std::span<const TokenId> a, std::span<const TokenId> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::vector<TokenSeq> refs{TokenSeq(b.begin(), b.end())};
  return bleu_tokens(a, std::span<const TokenSeq>(refs)).value;
}

/// Built-in similarity functions by name. Embedding similarity is not shipped.
inline SimilarityFn similarity_by_name(const std::string& name) {
  if (name == "unigram_cosine") return unigram_cosine;
  if (name == "bleu") return bleu_similarity;
  throw Error(Errc::kUnknownSimilarityFn, "'" + name + "' (expected unigram_cosine or bleu)");
}

/// alpha * Sim(G, R) + beta * (1 - max_{n in N} Sim(G, n)).
struct ContrastiveObjective {
  double alpha = 1.0;
  double beta = 1.0;
  TokenSeq reference;
  std::vector<TokenSeq> negatives;
  std::string similarity = "unigram_cosine";

  void validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(alpha + beta > 0.0)) {
      throw Error(Errc::kInvalidArgument, "need alpha >= 0, beta >= 0, alpha + beta > 0");
    }
  }
};

struct RerankResult {
  std::size_t best_index = 0;
  TokenSeq best;
  std::vector<double> scores;
};

/// Scores every candidate against the objective; the first maximal score wins.
inline RerankResult contrastive_rerank(std::span<const TokenSeq> candidates,
                                       const ContrastiveObjective& objective) {
  objective.validate();
  if (candidates.empty()) throw Error(Errc::kInvalidArgument, "rerank needs at least one candidate");
  const SimilarityFn sim = similarity_by_name(objective.similarity);

  RerankResult out;
  out.scores.reserve(candidates.size());
  for (const auto& g : candidates) {
    double worst = 0.0;
    for (const auto& n : objective.negatives) worst = std::max(worst, sim(g, n));
    out.scores.push_back(objective.alpha * sim(g, objective.reference) +
                         objective.beta * (1.0 - worst));
  }
  for (std::size_t i = 1; i < out.scores.size(); ++i) {
    if (out.scores[i] > out.scores[out.best_index]) out.best_index = i;
  }
  out.best = candidates[out.best_index];
  return out;
}

}  // namespace decode_lab

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
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "decode_lab/error.hpp"
#include "decode_lab/language_model.hpp"
#include "decode_lab/vocabulary.hpp"

namespace decode_lab {

inline constexpr double kBleuEpsilon = 1e-9;
inline constexpr double kProbabilityFloor = 1e-12;

struct MetricValue {
  std::string name;
  double value = 0.0;
  std::map<std::string, double> components;
  std::string note;
};

/// Occurrence counts of every length-n window.
template <class T>
struct NGramCounts {
  std::size_t n = 0;
  std::map<std::vector<T>, std::size_t> counts;
  std::size_t total = 0;

  std::size_t count(const std::vector<T>& gram) const {
    auto it = counts.find(gram);
    return it == counts.end() ? 0 : it->second;
  }
};

template <class T>
NGramCounts<T> count_ngrams(std::span<const T> tokens, std::size_t n) {
  NGramCounts<T> out;
  out.n = n;
  if (n == 0 || tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out.counts[std::vector<T>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    ++out.total;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Perplexity

struct PerplexityResult {
  double value = 0.0;
  std::size_t tokens = 0;
  /// Steps whose probability was raised to the 1e-12 floor.
  std::size_t floored_steps = 0;
};

/// exp of the mean negative natural-log likelihood of `tokens`, each scored
/// given `context` plus the preceding tokens.
template <NextTokenModel M>
PerplexityResult perplexity_of(const M& model, std::span<const TokenId> context,
                               std::span<const TokenId> tokens) {
  if (tokens.empty()) throw Error(Errc::kEmptyText, "perplexity needs at least one token");
  TokenSeq history(context.begin(), context.end());
  PerplexityResult r;
  double nll = 0.0;
  for (TokenId id : tokens) {
    const auto d = model.next_distribution(history);
    double p = d.probs.at(id);
    if (p < kProbabilityFloor) {
      p = kProbabilityFloor;
      ++r.floored_steps;
    }
    nll -= std::log(p);
    history.push_back(id);
  }
  r.tokens = tokens.size();
  r.value = std::exp(nll / static_cast<double>(tokens.size()));
  return r;
}

template <NextTokenModel M>
PerplexityResult perplexity(const M& model, std::string_view text) {
  const TokenSeq ids = tokenize(text, model.vocab());
  if (ids.empty()) throw Error(Errc::kEmptyText, "text has no tokens");
  return perplexity_of(model, std::span<const TokenId>{}, std::span<const TokenId>(ids));
}

// ---------------------------------------------------------------------------
// BLEU

/// Sentence BLEU with clipped n-gram precisions, uniform weights, epsilon
/// smoothing of zero precisions and the closest-reference brevity penalty.
/// Orders above the candidate length are dropped and the weights renormalized.
template <class T>
MetricValue bleu_tokens(std::span<const T> candidate, std::span<const std::vector<T>> references,
                        std::size_t max_n = 4) {
  if (candidate.empty()) throw Error(Errc::kEmptyInput, "bleu candidate is empty");
  if (references.empty()) throw Error(Errc::kEmptyInput, "bleu needs at least one reference");
  for (const auto& ref : references) {
    if (ref.empty()) throw Error(Errc::kEmptyInput, "bleu reference is empty");
  }
  if (max_n < 1) throw Error(Errc::kInvalidArgument, "max_n must be >= 1");

  MetricValue mv;
  mv.name = "bleu";
  const std::size_t c = candidate.size();
  const std::size_t orders = std::min(max_n, c);
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= orders; ++n) {
    auto cand = count_ngrams(candidate, n);
    std::map<std::vector<T>, std::size_t> max_ref;
    for (const auto& ref : references) {
      auto rc = count_ngrams(std::span<const T>(ref), n);
      for (const auto& [g, k] : rc.counts) max_ref[g] = std::max(max_ref[g], k);
    }
    std::size_t clipped = 0;
    for (const auto& [g, k] : cand.counts) {
      auto it = max_ref.find(g);
      if (it != max_ref.end()) clipped += std::min(k, it->second);
    }
    const double p = static_cast<double>(clipped) / static_cast<double>(cand.total);
    mv.components["p" + std::to_string(n)] = p;
    log_sum += std::log(p > 0.0 ? p : kBleuEpsilon);
  }

  std::size_t r = references.front().size();
  for (const auto& ref : references) {
    const auto d_new = std::abs(static_cast<long long>(ref.size()) - static_cast<long long>(c));
    const auto d_old = std::abs(static_cast<long long>(r) - static_cast<long long>(c));
    if (d_new < d_old || (d_new == d_old && ref.size() < r)) r = ref.size();
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  mv.components["bp"] = bp;
  mv.components["ref_len"] = static_cast<double>(r);
  mv.components["cand_len"] = static_cast<double>(c);
  mv.value = bp * std::exp(log_sum / static_cast<double>(orders));
  return mv;
}

inline MetricValue bleu(std::string_view candidate, std::span<const std::string> references,
                        std::size_t max_n = 4) {
  auto cand = split_words(candidate);
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : references) refs.push_back(split_words(r));
  return bleu_tokens(std::span<const std::string>(cand),
                     std::span<const std::vector<std::string>>(refs), max_n);
}

// ---------------------------------------------------------------------------
// ROUGE

namespace detail {

inline void fill_prf(MetricValue& mv, double overlap, double cand_total, double ref_total) {
  const double p = cand_total > 0 ? overlap / cand_total : 0.0;
  const double r = ref_total > 0 ? overlap / ref_total : 0.0;
  const double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  mv.components = {{"precision", p}, {"recall", r}, {"f1", f}};
  mv.value = f;
}

template <class T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace detail

/// n-gram overlap precision / recall / F1 (value = F1).
template <class T>
MetricValue rouge_n_tokens(std::span<const T> candidate, std::span<const T> reference, std::size_t n) {
  if (n < 1) throw Error(Errc::kInvalidArgument, "rouge n must be >= 1");
  if (candidate.size() < n || reference.size() < n) {
    throw Error(Errc::kTooShort, "rouge-" + std::to_string(n) + " needs at least n tokens on both sides");
  }
  auto cc = count_ngrams(candidate, n);
  auto rc = count_ngrams(reference, n);
  std::size_t overlap = 0;
  for (const auto& [g, k] : cc.counts) overlap += std::min(k, rc.count(g));
  MetricValue mv;
  mv.name = "rouge" + std::to_string(n);
  detail::fill_prf(mv, static_cast<double>(overlap), static_cast<double>(cc.total),
                   static_cast<double>(rc.total));
  return mv;
}

/// Longest-common-subsequence precision / recall / F1 (value = F1).
template <class T>
MetricValue rouge_l_tokens(std::span<const T> candidate, std::span<const T> reference) {
  if (candidate.empty() || reference.empty()) throw Error(Errc::kEmptyInput, "rouge-l needs non-empty texts");
  MetricValue mv;
  mv.name = "rougeL";
  const auto l = detail::lcs_length(candidate, reference);
  detail::fill_prf(mv, static_cast<double>(l), static_cast<double>(candidate.size()),
                   static_cast<double>(reference.size()));
  mv.components["lcs"] = static_cast<double>(l);
  return mv;
}

/// Reference-frequency-weighted n-gram recall:
///   sum_g min(c_cand(g), c_ref(g)) * c_ref(g) / sum_g c_ref(g)^2
/// This is not the classical weighted-LCS ROUGE-W.
template <class T>
MetricValue rouge_w_tokens(std::span<const T> candidate, std::span<const T> reference, std::size_t n) {
  if (n < 1) throw Error(Errc::kInvalidArgument, "rouge n must be >= 1");
  if (candidate.size() < n || reference.size() < n) {
    throw Error(Errc::kTooShort, "rouge-w needs at least n tokens on both sides");
  }
  auto cc = count_ngrams(candidate, n);
  auto rc = count_ngrams(reference, n);
  double num = 0.0, den = 0.0;
  for (const auto& [g, k] : rc.counts) {
    const double w = static_cast<double>(k);
    num += static_cast<double>(std::min(cc.count(g), k)) * w;
    den += w * w;
  }
  MetricValue mv;
  mv.name = "rougeW";
  mv.value = num / den;
  mv.components["n"] = static_cast<double>(n);
  mv.note = "frequency-weighted n-gram recall, not weighted-LCS";
  return mv;
}

inline MetricValue rouge_n(std::string_view candidate, std::string_view reference, std::size_t n) {
  auto c = split_words(candidate), r = split_words(reference);
  return rouge_n_tokens(std::span<const std::string>(c), std::span<const std::string>(r), n);
}

inline MetricValue rouge_l(std::string_view candidate, std::string_view reference) {
  auto c = split_words(candidate), r = split_words(reference);
  return rouge_l_tokens(std::span<const std::string>(c), std::span<const std::string>(r));
}

inline MetricValue rouge_w(std::string_view candidate, std::string_view reference, std::size_t n = 1) {
  auto c = split_words(candidate), r = split_words(reference);
  return rouge_w_tokens(std::span<const std::string>(c), std::span<const std::string>(r), n);
}

/// ROUGE-L against several references: the best F1.
template <class T>
MetricValue rouge_l_multi(std::span<const T> candidate, std::span<const std::vector<T>> references) {
  if (references.empty()) throw Error(Errc::kEmptyInput, "rouge-l needs a reference");
  MetricValue best;
  bool first = true;
  for (const auto& ref : references) {
    auto mv = rouge_l_tokens(candidate, std::span<const T>(ref));
    if (first || mv.value > best.value) best = std::move(mv);
    first = false;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Diversity

/// Unique n-grams over total n-gram occurrences, pooled across texts
/// (windows never cross text boundaries).
template <class T>
double distinct_n_tokens(std::span<const std::vector<T>> texts, std::size_t n) {
  if (n < 1) throw Error(Errc::kInvalidArgument, "distinct n must be >= 1");
  std::set<std::vector<T>> unique;
  std::size_t total = 0;
  for (const auto& t : texts) {
    auto counts = count_ngrams(std::span<const T>(t), n);
    total += counts.total;
    for (const auto& kv : counts.counts) unique.insert(kv.first);
  }
  if (total == 0) throw Error(Errc::kTooShort, "no " + std::to_string(n) + "-grams in the pool");
  return static_cast<double>(unique.size()) / static_cast<double>(total);
}

/// Shannon entropy (bits) of the pooled unigram distribution.
template <class T>
double token_entropy_tokens(std::span<const std::vector<T>> texts) {
  std::map<T, std::size_t> freq;
  std::size_t total = 0;
  for (const auto& t : texts) {
    for (const auto& tok : t) ++freq[tok];
    total += t.size();
  }
  if (total == 0) throw Error(Errc::kEmptyInput, "entropy needs at least one token");
  double h = 0.0;
  for (const auto& kv : freq) {
    const double f = static_cast<double>(kv.second) / static_cast<double>(total);
    h -= f * std::log2(f);
  }
  return h < 0.0 ? 0.0 : h;
}

namespace detail {

inline std::vector<std::vector<std::string>> split_all(std::span<const std::string> texts) {
  std::vector<std::vector<std::string>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(split_words(t));
  return out;
}

}  // namespace detail

inline double distinct_n(std::span<const std::string> texts, std::size_t n) {
  auto toks = detail::split_all(texts);
  return distinct_n_tokens(std::span<const std::vector<std::string>>(toks), n);
}

inline double token_entropy(std::span<const std::string> texts) {
  auto toks = detail::split_all(texts);
  return token_entropy_tokens(std::span<const std::vector<std::string>>(toks));
}

// ---------------------------------------------------------------------------
// Self-similarity

enum class SelfBase { kBleu, kRougeL };

/// Mean over i of base(text_i, every other text as reference). Lower = more diverse.
template <class T>
double self_metric_tokens(std::span<const std::vector<T>> texts, SelfBase base) {
  if (texts.size() < 2) throw Error(Errc::kNeedTwoTexts, "self-similarity needs at least two texts");
  double sum = 0.0;
  std::vector<std::vector<T>> others;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    others.clear();
    for (std::size_t j = 0; j < texts.size(); ++j) {
      if (j != i) others.push_back(texts[j]);
    }
    std::span<const T> cand(texts[i]);
    std::span<const std::vector<T>> refs(others);
    sum += base == SelfBase::kBleu ? bleu_tokens(cand, refs).value : rouge_l_multi(cand, refs).value;
  }
  return sum / static_cast<double>(texts.size());
}

inline double self_metric(std::span<const std::string> texts, SelfBase base) {
  auto toks = detail::split_all(texts);
  return self_metric_tokens(std::span<const std::vector<std::string>>(toks), base);
}

// ---------------------------------------------------------------------------
// Registry

enum class MetricScope {
  kModel,      // needs a model (perplexity)
  kReference,  // candidate vs references
  kPool,       // computed over a pool of generations
  kGroup,      // needs >= 2 generations of one prompt
};

struct MetricInfo {
  std::string_view name;
  MetricScope scope;
};

inline constexpr MetricInfo kMetricRegistry[] = {
    {"perplexity", MetricScope::kModel}, {"bleu", MetricScope::kReference},
    {"rouge1", MetricScope::kReference}, {"rouge2", MetricScope::kReference},
    {"rougeL", MetricScope::kReference}, {"rougeW", MetricScope::kReference},
    {"distinct1", MetricScope::kPool},   {"distinct2", MetricScope::kPool},
    {"entropy", MetricScope::kPool},     {"self_bleu", MetricScope::kGroup},
    {"self_rouge", MetricScope::kGroup},
};

/// Names kept for model-based metrics that this library does not ship.
inline constexpr std::string_view kReservedMetrics[] = {"bertscore", "embedding_sim"};

inline const MetricInfo& metric_info(std::string_view name) {
  for (const auto& info : kMetricRegistry) {
    if (info.name == name) return info;
  }
  for (auto reserved : kReservedMetrics) {
    if (reserved == name) {
      throw Error(Errc::kNotImplemented, "metric '" + std::string(name) + "' needs an external model");
    }
  }
  throw Error(Errc::kUnknownMetric, "'" + std::string(name) + "'");
}

inline bool is_registered_metric(std::string_view name) {
  for (const auto& info : kMetricRegistry) {
    if (info.name == name) return true;
  }
  return false;
}

}  // namespace decode_lab

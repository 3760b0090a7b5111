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
#include <numeric>
#include <span>
#include <vector>

#include "decode_lab/distribution.hpp"
#include "decode_lab/error.hpp"
#include "decode_lab/rng.hpp"
#include "decode_lab/vocabulary.hpp"

namespace decode_lab {

inline constexpr double kTemperatureFloor = 1e-6;
// Slack on mass thresholds so binary rounding (0.6 + 0.3 < 0.9) cannot add a token.
inline constexpr double kMassSlack = 1e-12;

namespace detail {

// Supported ids ordered by descending probability, lower id first on ties.
inline std::vector<TokenId> by_descending_prob(const Distribution& d) {
  std::vector<TokenId> ids;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.probs[i] > 0.0) ids.push_back(static_cast<TokenId>(i));
  }
  std::stable_sort(ids.begin(), ids.end(),
                   [&](TokenId a, TokenId b) { return d.probs[a] > d.probs[b]; });
  return ids;
}

inline Distribution keep_only(const Distribution& d, std::span<const TokenId> keep) {
  std::vector<double> out(d.size(), 0.0);
  for (TokenId id : keep) out[id] = d.probs[id];
  return normalized(std::move(out));
}

}  // namespace detail

/// probs^(1/T), renormalized. T == 1 is the identity; T below 1e-6 collapses
/// to the argmax.
inline Distribution apply_temperature(const Distribution& dist, double temperature) {
  if (!(temperature > 0.0)) throw Error(Errc::kInvalidArgument, "temperature must be > 0");
  if (temperature == 1.0) return dist;
  if (temperature < kTemperatureFloor) return Distribution::one_hot(dist.size(), dist.argmax());
  const double log_max = std::log(dist.probs[dist.argmax()]);
  std::vector<double> w(dist.size(), 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.probs[i] > 0.0) w[i] = std::exp((std::log(dist.probs[i]) - log_max) / temperature);
  }
  return normalized(std::move(w));
}

/// Keeps the k most probable tokens (lower id wins ties).
inline Distribution top_k_filter(const Distribution& dist, std::size_t k) {
  if (k < 1) throw Error(Errc::kInvalidArgument, "top_k must be >= 1");
  auto order = detail::by_descending_prob(dist);
  if (k >= order.size()) return dist;
  order.resize(k);
  return detail::keep_only(dist, order);
}

/// Smallest descending-probability prefix whose mass reaches p, including the
/// token that crosses the threshold.
inline Distribution top_p_filter(const Distribution& dist, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(Errc::kInvalidArgument, "top_p must be in (0, 1]");
  if (p == 1.0) return dist;
  auto order = detail::by_descending_prob(dist);
  double mass = 0.0;
  std::size_t keep = 0;
  while (keep < order.size()) {
    mass += dist.probs[order[keep++]];
    if (mass >= p - kMassSlack) break;
  }
  if (keep == order.size()) return dist;
  order.resize(keep);
  return detail::keep_only(dist, order);
}

/// Conditional entropy H = -sum p ln p (nats) over the support.
inline double entropy_nats(const Distribution& dist) {
  double h = 0.0;
  for (double p : dist.probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

/// Per-token |H + ln p| for supported tokens; unsupported tokens get +inf.
struct TypicalScore {
  double entropy_h = 0.0;
  std::vector<double> scores;
};

inline TypicalScore typical_scores(const Distribution& dist) {
  TypicalScore ts{entropy_nats(dist), std::vector<double>(dist.size(), INFINITY)};
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.probs[i] > 0.0) ts.scores[i] = std::abs(ts.entropy_h + std::log(dist.probs[i]));
  }
  return ts;
}

/// Locally typical truncation: rank supported tokens by |H + ln p| ascending
/// (lower id on ties) and keep the shortest prefix whose mass reaches tau.
inline Distribution typical_filter(const Distribution& dist, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(Errc::kInvalidArgument, "typical_p must be in (0, 1]");
  const TypicalScore ts = typical_scores(dist);
  std::vector<TokenId> order;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.probs[i] > 0.0) order.push_back(static_cast<TokenId>(i));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](TokenId a, TokenId b) { return ts.scores[a] < ts.scores[b]; });
  double mass = 0.0;
  std::size_t keep = 0;
  while (keep < order.size()) {
    mass += dist.probs[order[keep++]];
    if (mass >= tau - kMassSlack) break;
  }
  if (keep == order.size()) return dist;
  order.resize(keep);
  return detail::keep_only(dist, order);
}

struct BanOutcome {
  Distribution dist;
  /// Every supported token was banned, so the constraint was skipped.
  bool fallback = false;
  std::size_t banned = 0;
};

/// Zeros tokens that would complete an n-gram already present in `context`.
inline BanOutcome ban_repeating_ngrams_checked(const Distribution& dist,
                                               std::span<const TokenId> context, std::size_t n) {
  if (n == 0 || context.size() + 1 < n) return {dist, false, 0};
  const std::size_t prefix_len = n - 1;
  auto prefix = context.subspan(context.size() - prefix_len);
  std::vector<bool> banned(dist.size(), false);
  for (std::size_t i = 0; i + n <= context.size(); ++i) {
    if (std::equal(prefix.begin(), prefix.end(), context.begin() + static_cast<std::ptrdiff_t>(i))) {
      TokenId completes = context[i + prefix_len];
      if (completes < dist.size()) banned[completes] = true;
    }
  }
  std::vector<double> out = dist.probs;
  std::size_t count = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (banned[i] && out[i] > 0.0) {
      out[i] = 0.0;
      ++count;
    }
  }
  if (count == 0) return {dist, false, 0};
  if (count == dist.support()) return {dist, true, count};
  return {normalized(std::move(out)), false, count};
}

inline Distribution ban_repeating_ngrams(const Distribution& dist, std::span<const TokenId> context,
                                         std::size_t n) {
  return ban_repeating_ngrams_checked(dist, context, n).dist;
}

/// Inverse-CDF categorical draw over token-id order. Consumes one uniform.
inline TokenId sample_from(const Distribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist.probs[i] <= 0.0) continue;
    cum += dist.probs[i];
    last = i;
    if (u < cum) return static_cast<TokenId>(i);
  }
  return static_cast<TokenId>(last);
}

}  // namespace decode_lab

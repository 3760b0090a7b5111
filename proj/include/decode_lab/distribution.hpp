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

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "decode_lab/error.hpp"
#include "decode_lab/vocabulary.hpp"

namespace decode_lab {

inline constexpr double kNormTolerance = 1e-9;

/// Next-token probability vector over a vocabulary.
struct Distribution {
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }

  std::size_t support() const noexcept {
    std::size_t n = 0;
    for (double p : probs) n += p > 0.0 ? 1 : 0;
    return n;
  }

  double sum() const noexcept { return std::accumulate(probs.begin(), probs.end(), 0.0); }

  bool is_valid(double tolerance = kNormTolerance) const noexcept {
    if (probs.empty()) return false;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) return false;
    }
    return std::abs(sum() - 1.0) <= tolerance;
  }

  /// Lowest id among the maximal entries.
  TokenId argmax() const noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
      if (probs[i] > probs[best]) best = i;
    }
    return static_cast<TokenId>(best);
  }

  static Distribution one_hot(std::size_t size, TokenId id) {
    Distribution d{std::vector<double>(size, 0.0)};
    d.probs.at(id) = 1.0;
    return d;
  }

  static Distribution uniform(std::size_t size) {
    return Distribution{std::vector<double>(size, 1.0 / static_cast<double>(size))};
  }

  bool operator==(const Distribution&) const = default;
};

/// Scales non-negative weights to sum 1. Throws when the total mass is zero.
inline Distribution normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(Errc::kBadDistribution, "cannot normalize zero or non-finite mass");
  }
  for (double& w : weights) w /= total;
  return Distribution{std::move(weights)};
}

}  // namespace decode_lab

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

#include <concepts>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decode_lab/distribution.hpp"
#include "decode_lab/vocabulary.hpp"

namespace decode_lab {

/// Anything that answers P(next token | context) over a fixed vocabulary.
template <class M>
concept NextTokenModel = requires(const M& m, std::span<const TokenId> ctx, TokenId id) {
  { m.vocab() } -> std::convertible_to<const Vocabulary&>;
  { m.next_distribution(ctx) } -> std::same_as<Distribution>;
  { m.has_embeddings() } -> std::convertible_to<bool>;
  { m.embedding(id) } -> std::same_as<std::optional<std::vector<double>>>;
};

/// Runtime-polymorphic base shared by the shipped backends.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const Vocabulary& vocab() const = 0;
  virtual Distribution next_distribution(std::span<const TokenId> context) const = 0;
  virtual bool has_embeddings() const { return false; }
  /// Unit-norm vector for `id`, or nullopt when the backend has none for it.
  virtual std::optional<std::vector<double>> embedding(TokenId /*id*/) const {
    return std::nullopt;
  }
  /// Short human-readable identity recorded in run records.
  virtual std::string descriptor() const = 0;
};

static_assert(NextTokenModel<LanguageModel>);

}  // namespace decode_lab

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

#include <cctype>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "decode_lab/error.hpp"

namespace decode_lab {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

inline constexpr std::string_view kEosToken = "<eos>";
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";

/// Dense token <-> id mapping with the three reserved ids every backend needs.
class Vocabulary {
 public:
  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

  /// Builds from an ordered token list; `<eos>`, `<pad>`, `<unk>` are appended
  /// when not already listed. Duplicates are an error.
  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (auto special : {kEosToken, kPadToken, kUnkToken}) {
      bool present = false;
      for (const auto& t : tokens_) present = present || t == special;
      if (!present) tokens_.emplace_back(special);
    }
    build_index();
    eos_id_ = index_.at(std::string(kEosToken));
    pad_id_ = index_.at(std::string(kPadToken));
    unk_id_ = index_.at(std::string(kUnkToken));
  }

  /// Builds with explicit special ids (sidecar handshake).
  Vocabulary(std::vector<std::string> tokens, TokenId eos, TokenId pad, TokenId unk)
      : tokens_(std::move(tokens)), eos_id_(eos), pad_id_(pad), unk_id_(unk) {
    build_index();
    if (eos >= size() || pad >= size() || unk >= size()) {
      throw Error(Errc::kInvalidArgument, "special token id out of range");
    }
    if (eos == pad || eos == unk || pad == unk) {
      throw Error(Errc::kInvalidArgument, "eos, pad and unk ids must be distinct");
    }
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }

  std::optional<TokenId> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  TokenId id_or_unk(std::string_view token) const { return find(token).value_or(unk_id_); }

  TokenId eos_id() const noexcept { return eos_id_; }
  TokenId pad_id() const noexcept { return pad_id_; }
  TokenId unk_id() const noexcept { return unk_id_; }

  bool is_special(TokenId id) const noexcept {
    return id == eos_id_ || id == pad_id_ || id == unk_id_;
  }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void build_index() {
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (tokens_[i].empty()) throw Error(Errc::kInvalidArgument, "empty token in vocabulary");
      auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
      if (!inserted) throw Error(Errc::kInvalidArgument, "duplicate token '" + tokens_[i] + "'");
    }
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId eos_id_ = 0;
  TokenId pad_id_ = 0;
  TokenId unk_id_ = 0;
};

/// Splits on ASCII whitespace and lowercases ASCII letters. Bytes >= 0x80 pass through.
inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    auto uch = static_cast<unsigned char>(ch);
    if (std::isspace(uch)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(uch < 0x80 ? static_cast<char>(std::tolower(uch)) : ch);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

inline TokenSeq tokenize(std::string_view text, const Vocabulary& vocab) {
  TokenSeq ids;
  for (const auto& w : split_words(text)) ids.push_back(vocab.id_or_unk(w));
  return ids;
}

/// Joins tokens with single spaces. Special tokens are dropped unless `keep_special`.
inline std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab,
                              bool keep_special = false) {
  std::string out;
  for (TokenId id : ids) {
    if (!keep_special && vocab.is_special(id)) continue;
    if (!out.empty()) out.push_back(' ');
    out += vocab.token(id);
  }
  return out;
}

}  // namespace decode_lab

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
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "decode_lab/distribution.hpp"
#include "decode_lab/error.hpp"
#include "decode_lab/language_model.hpp"
#include "decode_lab/vocabulary.hpp"

namespace decode_lab {

namespace detail {

struct TokenSeqHash {
  std::size_t operator()(const TokenSeq& seq) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (TokenId id : seq) {
      h ^= id;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h ^ (seq.size() << 1));
  }
};

}  // namespace detail

/// Follower counts for one history.
struct ContextCounts {
  std::uint64_t total = 0;
  std::map<TokenId, std::uint64_t> next;

  bool operator==(const ContextCounts&) const = default;
};

/// Add-k smoothed n-gram model with longest-match backoff:
///   P(w | h) = (count(h, w) + k) / (count(h) + k |V|)
/// evaluated at the longest suffix h of the context (up to order-1 tokens)
/// with count(h) > 0. The empty history always has mass, so every context
/// resolves.
class NGramModel final : public LanguageModel {
 public:
  NGramModel(Vocabulary vocab, int order, double smoothing_k,
             std::unordered_map<TokenSeq, ContextCounts, detail::TokenSeqHash> counts)
      : vocab_(std::move(vocab)), order_(order), k_(smoothing_k), counts_(std::move(counts)) {
    if (order_ < 1) throw Error(Errc::kInvalidArgument, "n-gram order must be >= 1");
    if (!(k_ > 0.0)) throw Error(Errc::kInvalidArgument, "smoothing k must be > 0");
    auto it = counts_.find(TokenSeq{});
    if (it == counts_.end() || it->second.total == 0) {
      throw Error(Errc::kEmptyCorpus, "model has no unigram mass");
    }
  }

  const Vocabulary& vocab() const override { return vocab_; }
  int order() const noexcept { return order_; }
  double smoothing_k() const noexcept { return k_; }
  const auto& counts() const noexcept { return counts_; }

  Distribution next_distribution(std::span<const TokenId> context) const override {
    const ContextCounts& row = lookup(context);
    const double denom = static_cast<double>(row.total) + k_ * static_cast<double>(vocab_.size());
    std::vector<double> probs(vocab_.size(), k_ / denom);
    for (const auto& [id, c] : row.next) probs[id] = (static_cast<double>(c) + k_) / denom;
    return Distribution{std::move(probs)};
  }

  /// Length of the history actually used for `context` (0 = unigram).
  std::size_t matched_history(std::span<const TokenId> context) const {
    std::size_t m = std::min<std::size_t>(context.size(), static_cast<std::size_t>(order_ - 1));
    for (; m > 0; --m) {
      TokenSeq h(context.end() - static_cast<std::ptrdiff_t>(m), context.end());
      auto it = counts_.find(h);
      if (it != counts_.end() && it->second.total > 0) return m;
    }
    return 0;
  }

  std::string descriptor() const override {
    std::ostringstream os;
    os << "ngram(order=" << order_ << ",k=" << k_ << ",|V|=" << vocab_.size() << ")";
    return os.str();
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    std::vector<const TokenSeq*> keys;
    keys.reserve(counts_.size());
    for (const auto& kv : counts_) keys.push_back(&kv.first);
    std::sort(keys.begin(), keys.end(), [](const TokenSeq* a, const TokenSeq* b) {
      return a->size() != b->size() ? a->size() < b->size() : *a < *b;
    });
    for (const TokenSeq* key : keys) {
      const ContextCounts& cc = counts_.at(*key);
      nlohmann::json next = nlohmann::json::array();
      for (const auto& [id, c] : cc.next) next.push_back({id, c});
      rows.push_back({{"context", *key}, {"next", std::move(next)}});
    }
    return {{"format", "decode_lab.ngram"}, {"version", 1},       {"order", order_},
            {"k", k_},                      {"tokens", vocab_.tokens()}, {"counts", std::move(rows)}};
  }

  static NGramModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("format") != "decode_lab.ngram" || j.at("version") != 1) {
        throw Error(Errc::kParseError, "not a version-1 n-gram model file");
      }
      Vocabulary vocab(j.at("tokens").get<std::vector<std::string>>());
      std::unordered_map<TokenSeq, ContextCounts, detail::TokenSeqHash> counts;
      for (const auto& row : j.at("counts")) {
        auto ctx = row.at("context").get<TokenSeq>();
        ContextCounts cc;
        for (const auto& pair : row.at("next")) {
          auto id = pair.at(0).get<TokenId>();
          auto c = pair.at(1).get<std::uint64_t>();
          if (id >= vocab.size()) throw Error(Errc::kParseError, "token id out of range");
          cc.next[id] = c;
          cc.total += c;
        }
        counts.emplace(std::move(ctx), std::move(cc));
      }
      return NGramModel(std::move(vocab), j.at("order").get<int>(), j.at("k").get<double>(),
                        std::move(counts));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParseError, std::string("n-gram model json: ") + e.what());
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(Errc::kIoError, "cannot write " + path);
    out << to_json().dump() << '\n';
    if (!out) throw Error(Errc::kIoError, "write failed for " + path);
  }

  static NGramModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::kIoError, "cannot read " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kParseError, path + ": " + e.what());
    }
    return from_json(j);
  }

 private:
  const ContextCounts& lookup(std::span<const TokenId> context) const {
    std::size_t m = matched_history(context);
    if (m == 0) return counts_.at(TokenSeq{});
    return counts_.at(TokenSeq(context.end() - static_cast<std::ptrdiff_t>(m), context.end()));
  }

  Vocabulary vocab_;
  int order_;
  double k_;
  std::unordered_map<TokenSeq, ContextCounts, detail::TokenSeqHash> counts_;
};

/// Counts every history of length < order inside each document (one document
/// per string; `<eos>` appended to each). Vocabulary is first-appearance order.
inline NGramModel train_ngram(std::span<const std::string> corpus, int order, double smoothing_k) {
  if (order < 1) throw Error(Errc::kInvalidArgument, "n-gram order must be >= 1");
  if (!(smoothing_k > 0.0)) throw Error(Errc::kInvalidArgument, "smoothing k must be > 0");

  std::vector<std::vector<std::string>> docs;
  std::vector<std::string> tokens;
  std::unordered_map<std::string, bool> seen;
  for (const auto& line : corpus) {
    auto words = split_words(line);
    if (words.empty()) continue;
    for (const auto& w : words) {
      if (seen.emplace(w, true).second) tokens.push_back(w);
    }
    docs.push_back(std::move(words));
  }
  if (docs.empty()) throw Error(Errc::kEmptyCorpus, "no tokens survive tokenization");

  Vocabulary vocab(std::move(tokens));
  std::unordered_map<TokenSeq, ContextCounts, detail::TokenSeqHash> counts;
  for (const auto& words : docs) {
    TokenSeq ids;
    ids.reserve(words.size() + 1);
    for (const auto& w : words) ids.push_back(vocab.id_or_unk(w));
    ids.push_back(vocab.eos_id());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t max_hist = std::min<std::size_t>(i, static_cast<std::size_t>(order - 1));
      for (std::size_t m = 0; m <= max_hist; ++m) {
        TokenSeq h(ids.begin() + static_cast<std::ptrdiff_t>(i - m),
                   ids.begin() + static_cast<std::ptrdiff_t>(i));
        ContextCounts& cc = counts[std::move(h)];
        ++cc.total;
        ++cc.next[ids[i]];
      }
    }
  }
  return NGramModel(std::move(vocab), order, smoothing_k, std::move(counts));
}

/// Reads a plain-text corpus, one document per line.
inline std::vector<std::string> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoError, "cannot read corpus " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return lines;
}

}  // namespace decode_lab

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
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "decode_lab/distribution.hpp"
#include "decode_lab/error.hpp"
#include "decode_lab/language_model.hpp"
#include "decode_lab/vocabulary.hpp"

namespace decode_lab {

inline constexpr double kFixtureRowTolerance = 1e-6;

/// Explicit conditional probability table. A query uses the row whose context
/// is the longest suffix of the query context; with no match, the default row.
class FixtureModel final : public LanguageModel {
 public:
  using Rows = std::map<TokenSeq, Distribution>;
  using Embeddings = std::map<TokenId, std::vector<double>>;

  FixtureModel(Vocabulary vocab, Rows rows, Distribution fallback, Embeddings embeddings = {},
               std::string name = "fixture")
      : vocab_(std::move(vocab)),
        rows_(std::move(rows)),
        default_(std::move(fallback)),
        embeddings_(std::move(embeddings)),
        name_(std::move(name)) {
    check_row(default_, "default");
    for (const auto& [ctx, dist] : rows_) {
      for (TokenId id : ctx) {
        if (id >= vocab_.size()) throw Error(Errc::kInvalidArgument, "row context id out of range");
      }
      check_row(dist, "row '" + detokenize(ctx, vocab_, true) + "'");
      max_context_ = std::max(max_context_, ctx.size());
    }
    std::size_t dim = 0;
    for (auto& [id, vec] : embeddings_) {
      if (id >= vocab_.size()) throw Error(Errc::kInvalidArgument, "embedding id out of range");
      if (dim == 0) dim = vec.size();
      if (vec.empty() || vec.size() != dim) {
        throw Error(Errc::kInvalidArgument, "embedding dimensions disagree");
      }
      double norm = 0.0;
      for (double v : vec) norm += v * v;
      norm = std::sqrt(norm);
      if (!(norm > 0.0)) throw Error(Errc::kInvalidArgument, "zero embedding vector");
      for (double& v : vec) v /= norm;
    }
  }

  const Vocabulary& vocab() const override { return vocab_; }

  Distribution next_distribution(std::span<const TokenId> context) const override {
    const std::size_t longest = std::min(max_context_, context.size());
    for (std::size_t m = longest + 1; m-- > 0;) {
      TokenSeq suffix(context.end() - static_cast<std::ptrdiff_t>(m), context.end());
      auto it = rows_.find(suffix);
      if (it != rows_.end()) return it->second;
    }
    return default_;
  }

  bool has_embeddings() const override { return !embeddings_.empty(); }

  std::optional<std::vector<double>> embedding(TokenId id) const override {
    auto it = embeddings_.find(id);
    if (it == embeddings_.end()) return std::nullopt;
    return it->second;
  }

  std::string descriptor() const override { return name_; }

  const Rows& rows() const noexcept { return rows_; }
  const Distribution& default_row() const noexcept { return default_; }

 private:
  void check_row(const Distribution& d, const std::string& what) const {
    if (d.size() != vocab_.size()) {
      throw Error(Errc::kInvalidArgument, what + " has wrong width");
    }
    if (!d.is_valid(kNormTolerance)) {
      throw Error(Errc::kRowNotNormalized, what + " sums to " + std::to_string(d.sum()));
    }
  }

  Vocabulary vocab_;
  Rows rows_;
  Distribution default_;
  Embeddings embeddings_;
  std::string name_;
  std::size_t max_context_ = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline double parse_double(std::string_view text, const std::string& where) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw Error(Errc::kParseError, where + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

// Parses "tok=prob tok=prob ...". Rows off by more than 1e-6 are rejected,
// rows off by more than 1e-9 are rescaled, anything closer is kept verbatim.
inline Distribution parse_prob_list(std::string_view body, const Vocabulary& vocab,
                                    const std::string& where) {
  std::vector<double> probs(vocab.size(), 0.0);
  std::vector<bool> set(vocab.size(), false);
  for (auto item : split_ws(body)) {
    auto eq = item.rfind('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw Error(Errc::kParseError, where + ": expected tok=prob, got '" + std::string(item) + "'");
    }
    auto tok = item.substr(0, eq);
    auto id = vocab.find(tok);
    if (!id) throw Error(Errc::kParseError, where + ": token '" + std::string(tok) + "' not in vocab");
    if (set[*id]) throw Error(Errc::kParseError, where + ": duplicate token '" + std::string(tok) + "'");
    double p = parse_double(item.substr(eq + 1), where);
    if (p < 0.0) throw Error(Errc::kParseError, where + ": negative probability");
    probs[*id] = p;
    set[*id] = true;
  }
  double total = 0.0;
  for (double p : probs) total += p;
  if (std::abs(total - 1.0) > kFixtureRowTolerance) {
    std::ostringstream os;
    os.precision(12);
    os << where << " sums to " << total;
    throw Error(Errc::kRowNotNormalized, os.str());
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    for (double& p : probs) p /= total;
  }
  return Distribution{std::move(probs)};
}

}  // namespace detail

/// Parses the line-oriented fixture format:
///   vocab: tok1 tok2 ...
///   embed: tok v1 v2 ...              (optional, repeatable)
///   row: ctx1 ... ctxm | tok=prob ... (repeatable)
///   default: tok=prob ...
/// Blank lines and lines starting with '#' are ignored.
inline FixtureModel parse_fixture_model(std::istream& in, std::string name = "fixture") {
  std::optional<Vocabulary> vocab;
  FixtureModel::Rows rows;
  FixtureModel::Embeddings embeddings;
  std::optional<Distribution> fallback;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const std::string where = name + ":" + std::to_string(lineno);
    auto colon = text.find(':');
    if (colon == std::string_view::npos) throw Error(Errc::kParseError, where + ": missing ':'");
    auto key = detail::trim(text.substr(0, colon));
    auto body = detail::trim(text.substr(colon + 1));

    if (key == "vocab") {
      if (vocab) throw Error(Errc::kParseError, where + ": duplicate vocab line");
      std::vector<std::string> toks;
      for (auto t : detail::split_ws(body)) toks.emplace_back(t);
      try {
        vocab.emplace(std::move(toks));
      } catch (const Error& e) {
        throw Error(Errc::kParseError, where + ": " + e.what());
      }
      continue;
    }
    if (!vocab) throw Error(Errc::kParseError, where + ": vocab line must come first");

    if (key == "embed") {
      auto parts = detail::split_ws(body);
      if (parts.size() < 2) throw Error(Errc::kParseError, where + ": embed needs a token and values");
      auto id = vocab->find(parts[0]);
      if (!id) throw Error(Errc::kParseError, where + ": token '" + std::string(parts[0]) + "' not in vocab");
      std::vector<double> vec;
      for (std::size_t i = 1; i < parts.size(); ++i) vec.push_back(detail::parse_double(parts[i], where));
      if (!embeddings.emplace(*id, std::move(vec)).second) {
        throw Error(Errc::kParseError, where + ": duplicate embedding");
      }
    } else if (key == "row") {
      auto bar = body.find('|');
      if (bar == std::string_view::npos) throw Error(Errc::kParseError, where + ": row needs '|'");
      TokenSeq ctx;
      for (auto t : detail::split_ws(body.substr(0, bar))) {
        auto id = vocab->find(t);
        if (!id) throw Error(Errc::kParseError, where + ": context token '" + std::string(t) + "' not in vocab");
        ctx.push_back(*id);
      }
      const std::string label = where + " row '" + std::string(detail::trim(body.substr(0, bar))) + "'";
      auto dist = detail::parse_prob_list(body.substr(bar + 1), *vocab, label);
      if (!rows.emplace(std::move(ctx), std::move(dist)).second) {
        throw Error(Errc::kParseError, where + ": duplicate row context");
      }
    } else if (key == "default") {
      if (fallback) throw Error(Errc::kParseError, where + ": duplicate default line");
      fallback = detail::parse_prob_list(body, *vocab, where + " default");
    } else {
      throw Error(Errc::kParseError, where + ": unknown key '" + std::string(key) + "'");
    }
  }
  if (!vocab) throw Error(Errc::kParseError, name + ": missing vocab line");
  if (!fallback) throw Error(Errc::kParseError, name + ": missing default line");
  try {
    return FixtureModel(std::move(*vocab), std::move(rows), std::move(*fallback),
                        std::move(embeddings), std::move(name));
  } catch (const Error& e) {
    if (e.code() == Errc::kInvalidArgument) throw Error(Errc::kParseError, e.what());
    throw;
  }
}

inline FixtureModel load_fixture_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoError, "cannot read fixture " + path);
  return parse_fixture_model(in, "fixture:" + path);
}

}  // namespace decode_lab

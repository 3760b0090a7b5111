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

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "decode_lab/metrics.hpp"
#include "decode_lab/ngram_model.hpp"
#include "test_models.hpp"

namespace dl = decode_lab;
namespace dt = decode_lab::testing;

namespace {

using Texts = std::vector<std::string>;

dl::Errc error_code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const dl::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected dl::Error";
  return dl::Errc::kInvalidArgument;
}

std::string random_text(dl::Rng& rng, std::size_t min_len, std::size_t max_len, std::size_t vocab) {
  std::string out;
  const std::size_t n = min_len + rng() % (max_len - min_len + 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += "w" + std::to_string(rng() % vocab);
  }
  return out;
}

double bleu1(const std::string& cand, const std::string& ref) {
  Texts refs{ref};
  return dl::bleu(cand, refs).value;
}

}  // namespace

// ---------------------------------------------------------------------------
// perplexity

TEST(Perplexity, UniformModelEqualsVocabSize) {
  auto m = dt::uniform_model(50);
  ASSERT_EQ(m.vocab().size(), 50u);
  dl::Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    dl::TokenSeq ids(20);
    for (auto& id : ids) id = static_cast<dl::TokenId>(rng() % 50);
    EXPECT_NEAR(dl::perplexity_of(m, {}, ids).value, 50.0, 1e-9);
  }
  EXPECT_NEAR(dl::perplexity(m, "w1 w2 w3 anything at all").value, 50.0, 1e-9);
}

TEST(Perplexity, CertainPathIsOne) {
  std::istringstream in("vocab: x y\nrow: x | y=1\nrow: y | x=1\ndefault: x=1\n");
  auto m = dl::parse_fixture_model(in);
  auto r = dl::perplexity(m, "x y x y x");
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.floored_steps, 0u);
}

TEST(Perplexity, BigramHandOracle) {
  std::vector<std::string> corpus{"a b a b"};
  auto m = dl::train_ngram(corpus, 2, 1.0);
  // Training tokens: a b a b <eos>, |V| = 5.
  // P(a) = (2+1)/(5+5), P(b|a) = (2+1)/(2+5), P(a|b) = (1+1)/(2+5)
  const double p = 0.3 * (3.0 / 7.0) * (2.0 / 7.0) * (3.0 / 7.0);
  EXPECT_NEAR(dl::perplexity(m, "a b a b").value, std::pow(p, -0.25), 1e-9);
}

TEST(Perplexity, FloorIsCountedNotHidden) {
  auto m = dl::load_fixture_model(std::string(DECODE_LAB_DATA_DIR) + "/fixtures/cat_sat.fixture");
  auto r = dl::perplexity(m, "the cat");  // default row puts all mass on <eos>
  EXPECT_EQ(r.floored_steps, 2u);
  EXPECT_NEAR(r.value, 1e12, 1e3);
}

TEST(Perplexity, EmptyText) {
  auto m = dt::uniform_model(10);
  EXPECT_EQ(error_code_of([&] { dl::perplexity(m, "   "); }), dl::Errc::kEmptyText);
}

TEST(Perplexity, ConditionedOnContext) {
  auto m = dl::load_fixture_model(std::string(DECODE_LAB_DATA_DIR) + "/fixtures/cat_sat.fixture");
  const auto ctx = dl::tokenize("the cat sat on the", m.vocab());
  const auto cont = dl::tokenize("chair", m.vocab());
  EXPECT_NEAR(dl::perplexity_of(m, ctx, cont).value, 1.0 / 0.3, 1e-12);
}

// ---------------------------------------------------------------------------
// BLEU

TEST(Bleu, IdenticalIsOne) { EXPECT_NEAR(bleu1("the cat sat on the mat", "the cat sat on the mat"), 1.0, 1e-12); }

TEST(Bleu, NoOverlapIsFloored) { EXPECT_LE(bleu1("a b c d", "w x y z"), 1e-8); }

TEST(Bleu, ClippingExample) {
  // p1 = 1/4 (one "the" in the reference), p2..p4 = 0 -> eps; c = 4 > r = 2 so BP = 1
  auto mv = dl::bleu("the the the the", Texts{"the cat"});
  const double eps = 1e-9;
  EXPECT_NEAR(mv.components.at("p1"), 0.25, 1e-15);
  EXPECT_EQ(mv.components.at("bp"), 1.0);
  EXPECT_NEAR(mv.value, std::pow(0.25 * eps * eps * eps, 0.25), 1e-18);
}

TEST(Bleu, BrevityPenaltyUsesClosestReference) {
  // candidate of 4 tokens, references of 6 and 9: r = 6, BP = exp(1 - 6/4)
  auto mv = dl::bleu("a b c d", Texts{"a b c d e f g h i", "a b c d e f"});
  EXPECT_NEAR(mv.components.at("bp"), std::exp(1.0 - 6.0 / 4.0), 1e-12);
  EXPECT_NEAR(mv.value, std::exp(1.0 - 6.0 / 4.0), 1e-12);
}

TEST(Bleu, ClipsAgainstMaxReferenceCount) {
  // "a" appears twice in the second reference
  auto mv = dl::bleu("a a a", Texts{"a b c", "a a d"}, 1);
  EXPECT_NEAR(mv.components.at("p1"), 2.0 / 3.0, 1e-15);
}

TEST(Bleu, EmptyInputs) {
  EXPECT_EQ(error_code_of([] { dl::bleu("", Texts{"a"}); }), dl::Errc::kEmptyInput);
  EXPECT_EQ(error_code_of([] { dl::bleu("a", Texts{}); }), dl::Errc::kEmptyInput);
  EXPECT_EQ(error_code_of([] { dl::bleu("a", Texts{" "}); }), dl::Errc::kEmptyInput);
}

TEST(Bleu, AbsentTokenNeverRaisesClippedNumerators) {
  dl::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto cand = random_text(rng, 1, 10, 6);
    const Texts refs{random_text(rng, 1, 10, 6), random_text(rng, 1, 10, 6)};
    auto before = dl::bleu(cand, refs);
    auto after = dl::bleu(cand + " zzz", refs);
    const double c = static_cast<double>(dl::split_words(cand).size());
    for (int n = 1; n <= 4 && n <= c; ++n) {
      const std::string key = "p" + std::to_string(n);
      const double num_before = before.components.at(key) * (c - n + 1);
      const double num_after = after.components.at(key) * (c + 1 - n + 1);
      // eps-smoothed zero precisions carry no count
      if (before.components.at(key) <= 1e-9) continue;
      ASSERT_LE(num_after, num_before + 1e-9);
    }
  }
}

// ---------------------------------------------------------------------------
// ROUGE

TEST(Rouge, IdenticalAndDisjoint) {
  EXPECT_EQ(dl::rouge_n("a b c", "a b c", 2).value, 1.0);
  EXPECT_EQ(dl::rouge_n("a b c", "d e f", 1).value, 0.0);
  EXPECT_EQ(dl::rouge_l("a b c", "a b c").value, 1.0);
  EXPECT_EQ(dl::rouge_l("a b c", "d e f").value, 0.0);
  EXPECT_EQ(dl::rouge_w("a b c", "a b c").value, 1.0);
  EXPECT_EQ(dl::rouge_w("a b c", "d e f").value, 0.0);
}

TEST(Rouge, BigramExample) {
  auto mv = dl::rouge_n("the cat sat", "the cat slept", 2);
  EXPECT_NEAR(mv.components.at("precision"), 0.5, 1e-15);
  EXPECT_NEAR(mv.components.at("recall"), 0.5, 1e-15);
  EXPECT_NEAR(mv.value, 0.5, 1e-15);
}

TEST(Rouge, LcsExample) {
  auto mv = dl::rouge_l("the cat sat", "the dog sat");
  EXPECT_NEAR(mv.components.at("precision"), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(mv.components.at("recall"), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(mv.value, 2.0 / 3.0, 1e-15);
}

TEST(Rouge, LcsAgainstBruteForce) {
  // Oracle: longest common subsequence by enumerating candidate subsets.
  dl::Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    auto a = dl::split_words(random_text(rng, 1, 8, 4));
    auto b = dl::split_words(random_text(rng, 1, 8, 4));
    std::size_t best = 0;
    for (std::uint32_t mask = 1; mask < (1u << a.size()); ++mask) {
      std::vector<std::string> sub;
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (mask & (1u << k)) sub.push_back(a[k]);
      }
      std::size_t j = 0;
      for (const auto& w : b) {
        if (j < sub.size() && sub[j] == w) ++j;
      }
      if (j == sub.size()) best = std::max(best, sub.size());
    }
    auto mv = dl::rouge_l_tokens(std::span<const std::string>(a), std::span<const std::string>(b));
    ASSERT_NEAR(mv.components.at("recall"), static_cast<double>(best) / b.size(), 1e-12);
  }
}

TEST(Rouge, WeightedExample) {
  // ref counts {a:2, b:1}; overlap weighted 1*2 + 1*1 = 3; denominator 4 + 1
  EXPECT_NEAR(dl::rouge_w("a b", "a a b", 1).value, 0.6, 1e-15);
}

TEST(Rouge, TooShortAndEmpty) {
  EXPECT_EQ(error_code_of([] { dl::rouge_n("a", "a b", 2); }), dl::Errc::kTooShort);
  EXPECT_EQ(error_code_of([] { dl::rouge_w("a b", "a", 2); }), dl::Errc::kTooShort);
  EXPECT_EQ(error_code_of([] { dl::rouge_l("", "a"); }), dl::Errc::kEmptyInput);
}

TEST(Rouge, SelfF1IsOne) {
  dl::Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto t = random_text(rng, 3, 20, 8);
    ASSERT_EQ(dl::rouge_n(t, t, 1).value, 1.0);
    ASSERT_EQ(dl::rouge_n(t, t, 3).value, 1.0);
    ASSERT_EQ(dl::rouge_l(t, t).value, 1.0);
  }
}

// ---------------------------------------------------------------------------
// distinct-n and entropy

TEST(Distinct, Examples) {
  EXPECT_EQ(dl::distinct_n(Texts{"a b c d"}, 1), 1.0);
  EXPECT_EQ(dl::distinct_n(Texts{"a a a a"}, 1), 0.25);
  EXPECT_EQ(dl::distinct_n(Texts{"a b", "a b"}, 2), 0.5);
}

TEST(Distinct, NgramsDoNotCrossTexts) {
  // pooled "a b" + "c d" has bigrams (a b), (c d) only
  EXPECT_EQ(dl::distinct_n(Texts{"a b", "c d"}, 2), 1.0);
  EXPECT_EQ(dl::distinct_n(Texts{"a b", "b a"}, 2), 1.0);
}

TEST(Distinct, TooShort) {
  EXPECT_EQ(error_code_of([] { dl::distinct_n(Texts{"a"}, 2); }), dl::Errc::kTooShort);
}

TEST(Entropy, Examples) {
  EXPECT_EQ(dl::token_entropy(Texts{"a a a"}), 0.0);
  EXPECT_NEAR(dl::token_entropy(Texts{"a b c d"}), 2.0, 1e-12);
  const double want = -(2.0 / 3 * std::log2(2.0 / 3) + 1.0 / 3 * std::log2(1.0 / 3));
  EXPECT_NEAR(dl::token_entropy(Texts{"a a b"}), want, 1e-12);
  EXPECT_NEAR(want, 0.9183, 1e-4);
  EXPECT_EQ(error_code_of([] { dl::token_entropy(Texts{"", " "}); }), dl::Errc::kEmptyInput);
}

TEST(Ranges, FuzzedBounds) {
  dl::Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    Texts pool;
    for (int k = 0; k < 3; ++k) pool.push_back(random_text(rng, 2, 12, 10));
    const auto b = dl::bleu(pool[0], Texts{pool[1], pool[2]}).value;
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, 1.0);
    for (double v : {dl::rouge_n(pool[0], pool[1], 1).value, dl::rouge_l(pool[0], pool[1]).value,
                     dl::rouge_w(pool[0], pool[1], 2).value, dl::distinct_n(pool, 2),
                     dl::self_metric(pool, dl::SelfBase::kBleu), dl::self_metric(pool, dl::SelfBase::kRougeL)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-12);
    }
    std::set<std::string> types;
    for (const auto& t : pool) {
      for (const auto& w : dl::split_words(t)) types.insert(w);
    }
    const double h = dl::token_entropy(pool);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(types.size())) + 1e-12);
  }
}

// ---------------------------------------------------------------------------
// self metrics

TEST(SelfMetric, IdenticalTextsScoreOne) {
  Texts five(5, "the quick brown fox jumps");
  EXPECT_NEAR(dl::self_metric(five, dl::SelfBase::kBleu), 1.0, 1e-12);
  EXPECT_NEAR(dl::self_metric(five, dl::SelfBase::kRougeL), 1.0, 1e-12);
}

TEST(SelfMetric, NeedsTwoTexts) {
  EXPECT_EQ(error_code_of([] { dl::self_metric(Texts{"a b"}, dl::SelfBase::kBleu); }), dl::Errc::kNeedTwoTexts);
}

TEST(SelfMetric, DisjointRougeIsZero) {
  EXPECT_EQ(dl::self_metric(Texts{"a b", "c d", "e f"}, dl::SelfBase::kRougeL), 0.0);
}

TEST(SelfMetric, LeaveOneOutMean) {
  // rougeL f1: t0 vs {t1}: LCS "a" -> p=1/2 r=1/2; t1 vs {t0}: same; mean 0.5
  EXPECT_NEAR(dl::self_metric(Texts{"a b", "a c"}, dl::SelfBase::kRougeL), 0.5, 1e-12);
}

TEST(SelfMetric, DuplicationNeverDecreases) {
  dl::Rng rng(29);
  for (int i = 0; i < 100; ++i) {
    Texts set;
    const std::size_t n = 2 + rng() % 4;
    for (std::size_t k = 0; k < n; ++k) set.push_back(random_text(rng, 2, 10, 12));
    Texts dup = set;
    dup.push_back(set[rng() % n]);
    for (auto base : {dl::SelfBase::kBleu, dl::SelfBase::kRougeL}) {
      ASSERT_GE(dl::self_metric(dup, base), dl::self_metric(set, base) - 1e-12) << "set " << i;
    }
  }
}

// ---------------------------------------------------------------------------
// registry

TEST(Registry, NamesAndReserved) {
  for (auto name : {"perplexity", "bleu", "rouge1", "rouge2", "rougeL", "rougeW", "distinct1", "distinct2",
                    "entropy", "self_bleu", "self_rouge"}) {
    EXPECT_TRUE(dl::is_registered_metric(name)) << name;
    EXPECT_EQ(dl::metric_info(name).name, name);
  }
  EXPECT_EQ(error_code_of([] { dl::metric_info("bertscore"); }), dl::Errc::kNotImplemented);
  EXPECT_EQ(error_code_of([] { dl::metric_info("embedding_sim"); }), dl::Errc::kNotImplemented);
  EXPECT_EQ(error_code_of([] { dl::metric_info("meteor"); }), dl::Errc::kUnknownMetric);
}

TEST(NGramCounts, TotalsMatch) {
  std::vector<int> toks{1, 2, 1, 2, 1};
  auto c = dl::count_ngrams(std::span<const int>(toks), 2);
  EXPECT_EQ(c.total, 4u);
  EXPECT_EQ(c.count({1, 2}), 2u);
  EXPECT_EQ(c.count({2, 1}), 2u);
  std::size_t sum = 0;
  for (const auto& [g, k] : c.counts) {
    EXPECT_EQ(g.size(), 2u);
    sum += k;
  }
  EXPECT_EQ(sum, c.total);
}

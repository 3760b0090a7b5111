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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "decode_lab/comparison.hpp"
#include "decode_lab/fixture_model.hpp"
#include "decode_lab/ngram_model.hpp"
#include "decode_lab/prompts.hpp"
#include "decode_lab/report.hpp"
#include "decode_lab/run_record.hpp"

namespace dl = decode_lab;
namespace fs = std::filesystem;

namespace {

const std::string kData = DECODE_LAB_DATA_DIR;
const std::string kGolden = DECODE_LAB_GOLDEN_DIR;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("decode_lab_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

dl::Errc error_code_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const dl::Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "expected dl::Error";
  return dl::Errc::kInvalidArgument;
}

const dl::NGramModel& demo_model() {
  static const dl::NGramModel model = [] {
    auto corpus = dl::read_corpus(kData + "/demo_corpus.txt");
    return dl::train_ngram(corpus, 3, 0.01);
  }();
  return model;
}

dl::PromptSet three_prompts() {
  return dl::PromptSet{{"the old harbor", "in the morning", "she said that"}, "inline"};
}

std::vector<dl::RunRecord> strip_volatile(std::vector<dl::RunRecord> records) {
  for (auto& r : records) {
    r.run_id.clear();
    r.timestamp = 0;
  }
  return records;
}

dl::GenerationConfig short_config() {
  dl::GenerationConfig cfg;
  cfg.max_length = 20;
  cfg.seed = 99;
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// prompts

TEST(Prompts, KeepsOrderAndSkipsBlankLines) {
  TempDir dir;
  write_file(dir.file("p.txt"), "first prompt\n\n  \nsecond\r\nthird one\n");
  auto set = dl::ingest_prompts(dir.file("p.txt"));
  EXPECT_EQ(set.prompts, (std::vector<std::string>{"first prompt", "second", "third one"}));
  EXPECT_EQ(set.source, dir.file("p.txt"));
}

TEST(Prompts, BlankFileIsEmptyPromptSet) {
  TempDir dir;
  write_file(dir.file("p.txt"), "\n   \n\t\n");
  EXPECT_EQ(error_code_of([&] { dl::ingest_prompts(dir.file("p.txt")); }), dl::Errc::kEmptyPromptSet);
}

TEST(Prompts, MissingFileIsIoError) {
  EXPECT_EQ(error_code_of([] { dl::ingest_prompts("/nonexistent/prompts.txt"); }), dl::Errc::kIoError);
}

TEST(Prompts, LineRetainedVerbatim) {
  TempDir dir;
  const std::string line = "Can you explain the concept of artificial intelligence?";
  write_file(dir.file("p.txt"), line + "\n");
  EXPECT_EQ(dl::ingest_prompts(dir.file("p.txt")).prompts.at(0), line);
}

// ---------------------------------------------------------------------------
// comparison runs

TEST(Comparison, Cardinality) {
  dl::ComparisonOptions opt;
  opt.strategies = {"greedy", "top_k"};
  opt.samples_per_prompt = 1;
  auto records = dl::run_comparison(demo_model(), "demo", three_prompts(), short_config(), opt);
  ASSERT_EQ(records.size(), 6u);
  EXPECT_EQ(records[0].strategy, "greedy");
  EXPECT_EQ(records[3].strategy, "top_k");
  EXPECT_EQ(records[4].prompt_index, 1u);
}

TEST(Comparison, DeterministicStrategiesRunOnce) {
  dl::ComparisonOptions opt;
  opt.strategies = {"greedy", "beam", "top_p"};
  opt.samples_per_prompt = 4;
  auto records = dl::run_comparison(demo_model(), "demo", three_prompts(), short_config(), opt);
  EXPECT_EQ(records.size(), 3u + 3u + 12u);
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.run_id);
  EXPECT_EQ(ids.size(), records.size());
}

TEST(Comparison, RepeatableAndThreadIndependent) {
  dl::ComparisonOptions opt;
  opt.strategies = {"greedy", "top_k", "typical"};
  opt.samples_per_prompt = 3;
  auto a = dl::run_comparison(demo_model(), "demo", three_prompts(), short_config(), opt);
  opt.threads = 4;
  auto b = dl::run_comparison(demo_model(), "demo", three_prompts(), short_config(), opt);
  EXPECT_EQ(strip_volatile(a), strip_volatile(b));
}

TEST(Comparison, MetricsAttached) {
  dl::ComparisonOptions opt;
  opt.strategies = {"top_k"};
  opt.samples_per_prompt = 3;
  auto records = dl::run_comparison(demo_model(), "demo", three_prompts(), short_config(), opt);
  for (const auto& r : records) {
    ASSERT_TRUE(r.ok());
    EXPECT_TRUE(r.metrics.count("perplexity"));
    EXPECT_TRUE(r.metrics.count("distinct1"));
    EXPECT_TRUE(r.metrics.count("entropy"));
    EXPECT_EQ(r.metrics.count("self_bleu"), r.sample_index == 0 ? 1u : 0u);
    EXPECT_GE(r.metrics.at("perplexity"), 1.0);
    for (const auto& [name, v] : r.metrics) EXPECT_TRUE(dl::is_registered_metric(name)) << name;
  }
}

TEST(Comparison, FailuresAreRecordedPerRecord) {
  // contrastive needs embeddings; the n-gram model has none
  dl::ComparisonOptions opt;
  opt.strategies = {"contrastive", "greedy"};
  auto records = dl::run_comparison(demo_model(), "demo", three_prompts(), short_config(), opt);
  ASSERT_EQ(records.size(), 6u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_FALSE(records[i].ok());
    EXPECT_FALSE(records[i].result.has_value());
    EXPECT_NE(records[i].error->find("MissingEmbeddings"), std::string::npos) << *records[i].error;
  }
  for (int i = 3; i < 6; ++i) EXPECT_TRUE(records[i].ok());
}

TEST(Comparison, UnknownStrategyRejectedUpFront) {
  dl::ComparisonOptions opt;
  opt.strategies = {"greedy", "nope"};
  EXPECT_EQ(error_code_of([&] { dl::run_comparison(demo_model(), "demo", three_prompts(), short_config(), opt); }),
            dl::Errc::kUnknownStrategy);
}

// ---------------------------------------------------------------------------
// aggregation and rendering

namespace {

dl::RunRecord record_with(const std::string& strategy, std::map<std::string, double> metrics) {
  dl::RunRecord r;
  r.strategy = strategy;
  r.result = dl::GenerationResult{};
  r.metrics = std::move(metrics);
  return r;
}

}  // namespace

TEST(Aggregate, SingleRecord) {
  std::vector<dl::RunRecord> rs{record_with("greedy", {{"distinct1", 0.7}})};
  auto t = dl::aggregate_report(rs);
  const auto& a = t.find("greedy")->metrics.at("distinct1");
  EXPECT_EQ(a, (dl::Aggregate{0.7, 0.7, 0.7, 1}));
}

TEST(Aggregate, MeanMinMaxCount) {
  std::vector<dl::RunRecord> rs{record_with("top_k", {{"distinct2", 0.2}}), record_with("top_k", {{"distinct2", 0.4}})};
  auto a = dl::aggregate_report(rs).find("top_k")->metrics.at("distinct2");
  EXPECT_NEAR(a.mean, 0.3, 1e-15);
  EXPECT_EQ(a.min, 0.2);
  EXPECT_EQ(a.max, 0.4);
  EXPECT_EQ(a.count, 2u);
}

TEST(Aggregate, ErrorsExcludedAndCounted) {
  std::vector<dl::RunRecord> rs{record_with("beam", {{"entropy", 1.0}}), record_with("beam", {{"entropy", 3.0}})};
  dl::RunRecord bad;
  bad.strategy = "beam";
  bad.error = "boom";
  rs.push_back(bad);
  auto t = dl::aggregate_report(rs);
  const auto* row = t.find("beam");
  EXPECT_EQ(row->records, 3u);
  EXPECT_EQ(row->errors, 1u);
  EXPECT_EQ(row->metrics.at("entropy").count, 2u);
  EXPECT_EQ(row->metrics.at("entropy").mean, 2.0);
}

TEST(Aggregate, NoRecords) {
  std::vector<dl::RunRecord> none;
  EXPECT_EQ(error_code_of([&] { dl::aggregate_report(none); }), dl::Errc::kNoRecords);
}

TEST(Aggregate, MeansStayInsideRange) {
  dl::ComparisonOptions opt;
  opt.strategies = {"greedy", "top_k", "top_p"};
  opt.samples_per_prompt = 4;
  auto records = dl::run_comparison(demo_model(), "demo", three_prompts(), short_config(), opt);
  auto table = dl::aggregate_report(records);
  for (const auto& row : table.rows) {
    std::size_t contributing = 0;
    for (const auto& r : records) contributing += r.strategy == row.strategy && r.metrics.count("entropy");
    EXPECT_EQ(row.metrics.at("entropy").count, contributing);
    for (const auto& [name, a] : row.metrics) {
      EXPECT_LE(a.min, a.mean) << name;
      EXPECT_LE(a.mean, a.max) << name;
    }
  }
}

namespace {

dl::MetricTable golden_table() {
  dl::MetricTable t;
  dl::StrategyRow row;
  row.strategy = "greedy";
  row.records = 2;
  row.errors = 0;
  row.metrics["perplexity"] = {12.3456789, 10.0, 14.6913578, 2};
  row.metrics["distinct1"] = {0.75, 0.5, 1.0, 2};
  row.metrics["self_bleu"] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1};
  t.rows.push_back(row);
  return t;
}

}  // namespace

TEST(Render, MarkdownMatchesGolden) {
  EXPECT_EQ(dl::render_report(golden_table(), dl::ReportFormat::kMarkdown), read_file(kGolden + "/single_row.md"));
}

TEST(Render, CsvRowCount) {
  dl::ComparisonOptions opt;
  opt.strategies = {"greedy", "top_k", "typical"};
  opt.samples_per_prompt = 2;
  auto table = dl::aggregate_report(dl::run_comparison(demo_model(), "demo", three_prompts(), short_config(), opt));
  const auto csv = dl::render_report(table, dl::ReportFormat::kCsv);
  const auto lines = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
  EXPECT_EQ(lines, table.rows.size() * table.metric_names().size() + 1);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "strategy,metric,mean,min,max,count");
}

TEST(Render, CsvUsesSixSignificantDigits) {
  const auto csv = dl::render_report(golden_table(), dl::ReportFormat::kCsv);
  EXPECT_NE(csv.find("greedy,perplexity,12.3457,10,14.6914,2"), std::string::npos) << csv;
  EXPECT_NE(csv.find("greedy,self_bleu,0.333333,0.333333,0.333333,1"), std::string::npos) << csv;
}

TEST(Render, JsonRoundTrip) {
  dl::ComparisonOptions opt;
  opt.strategies = {"greedy", "top_p"};
  opt.samples_per_prompt = 3;
  auto table = dl::aggregate_report(dl::run_comparison(demo_model(), "demo", three_prompts(), short_config(), opt));
  auto text = dl::render_report(table, dl::ReportFormat::kJson);
  EXPECT_EQ(dl::report_from_json(nlohmann::json::parse(text)), table);
}

TEST(Render, UnknownFormat) { EXPECT_THROW(dl::parse_report_format("xlsx"), dl::Error); }

// ---------------------------------------------------------------------------
// persistence

TEST(Persist, RoundTripOfTenRecords) {
  TempDir dir;
  dl::ComparisonOptions opt;
  opt.strategies = {"beam", "top_k", "greedy"};
  opt.samples_per_prompt = 3;
  auto records = dl::run_comparison(demo_model(), "demo", three_prompts(), short_config(), opt);
  records.resize(10);
  records[9].error = "synthetic failure";
  records[9].result.reset();
  records[8].skipped_metrics["distinct2"] = "TooShort: need 2 tokens";
  dl::persist_runs(records, dir.file("runs.jsonl"));
  auto back = dl::load_runs(dir.file("runs.jsonl"));
  ASSERT_EQ(back.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(back[i], records[i]) << "record " << i;
  // beams survive too
  ASSERT_FALSE(back[0].result->beams.empty());
}

TEST(Persist, EveryLineCarriesSchemaOne) {
  TempDir dir;
  std::vector<dl::RunRecord> rs{record_with("greedy", {{"entropy", 1.5}})};
  dl::persist_runs(rs, dir.file("runs.jsonl"));
  auto j = nlohmann::json::parse(read_file(dir.file("runs.jsonl")));
  EXPECT_EQ(j.at("schema"), 1);
}

TEST(Persist, SchemaTwoIsMismatch) {
  TempDir dir;
  std::vector<dl::RunRecord> rs{record_with("greedy", {})};
  dl::persist_runs(rs, dir.file("runs.jsonl"));
  auto j = nlohmann::json::parse(read_file(dir.file("runs.jsonl")));
  j["schema"] = 2;
  write_file(dir.file("runs.jsonl"), j.dump() + "\n");
  EXPECT_EQ(error_code_of([&] { dl::load_runs(dir.file("runs.jsonl")); }), dl::Errc::kSchemaMismatch);
}

TEST(Persist, TruncatedLastLineNamesLine) {
  TempDir dir;
  std::vector<dl::RunRecord> rs{record_with("a", {}), record_with("b", {}), record_with("c", {})};
  dl::persist_runs(rs, dir.file("runs.jsonl"));
  auto text = read_file(dir.file("runs.jsonl"));
  write_file(dir.file("runs.jsonl"), text.substr(0, text.size() - 20));
  std::string message;
  EXPECT_EQ(error_code_of([&] { dl::load_runs(dir.file("runs.jsonl")); }, &message), dl::Errc::kParseError);
  EXPECT_NE(message.find("runs.jsonl:3"), std::string::npos) << message;
}

TEST(Persist, MissingFileIsIoError) {
  EXPECT_EQ(error_code_of([] { dl::load_runs("/nonexistent/runs.jsonl"); }), dl::Errc::kIoError);
}

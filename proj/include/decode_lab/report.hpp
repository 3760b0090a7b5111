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
#include <cstdio>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "decode_lab/error.hpp"
#include "decode_lab/metrics.hpp"
#include "decode_lab/run_record.hpp"

namespace decode_lab {

struct Aggregate {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  bool operator==(const Aggregate&) const = default;
};

struct StrategyRow {
  std::string strategy;
  std::size_t records = 0;
  std::size_t errors = 0;
  std::map<std::string, Aggregate> metrics;

  bool operator==(const StrategyRow&) const = default;
};

/// Strategy rows in first-appearance order, each mapping metric -> aggregate.
struct MetricTable {
  std::vector<StrategyRow> rows;

  const StrategyRow* find(std::string_view strategy) const {
    for (const auto& r : rows) {
      if (r.strategy == strategy) return &r;
    }
    return nullptr;
  }

  /// Metric names present anywhere in the table, in registry order.
  std::vector<std::string> metric_names() const {
    std::vector<std::string> names;
    for (const auto& info : kMetricRegistry) {
      for (const auto& r : rows) {
        if (r.metrics.count(std::string(info.name))) {
          names.emplace_back(info.name);
          break;
        }
      }
    }
    return names;
  }

  bool operator==(const MetricTable&) const = default;
};

enum class ReportFormat { kMarkdown, kCsv, kJson };

inline ReportFormat parse_report_format(std::string_view name) {
  if (name == "md") return ReportFormat::kMarkdown;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw Error(Errc::kInvalidArgument, "report format must be md, csv or json");
}

/// Groups by strategy; errored records count toward `errors` only.
inline MetricTable aggregate_report(std::span<const RunRecord> records) {
  if (records.empty()) throw Error(Errc::kNoRecords, "nothing to aggregate");
  MetricTable table;
  std::map<std::string, std::map<std::string, double>> sums;
  auto row_for = [&](const std::string& strategy) -> StrategyRow& {
    for (auto& r : table.rows) {
      if (r.strategy == strategy) return r;
    }
    table.rows.push_back(StrategyRow{strategy, 0, 0, {}});
    return table.rows.back();
  };
  for (const auto& rec : records) {
    StrategyRow& row = row_for(rec.strategy);
    ++row.records;
    if (!rec.ok()) {
      ++row.errors;
      continue;
    }
    for (const auto& [name, value] : rec.metrics) {
      auto [it, fresh] = row.metrics.try_emplace(name, Aggregate{0.0, value, value, 0});
      Aggregate& agg = it->second;
      agg.min = std::min(agg.min, value);
      agg.max = std::max(agg.max, value);
      ++agg.count;
      sums[rec.strategy][name] += value;
    }
  }
  for (auto& row : table.rows) {
    for (auto& [name, agg] : row.metrics) {
      agg.mean = sums[row.strategy][name] / static_cast<double>(agg.count);
      // Summation rounding must not push the mean outside [min, max].
      agg.mean = std::clamp(agg.mean, agg.min, agg.max);
    }
  }
  return table;
}

namespace detail {

inline std::string sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct MetricFamily {
  std::string_view title;
  std::vector<std::string_view> metrics;
};

inline const std::vector<MetricFamily>& metric_families() {
  static const std::vector<MetricFamily> families = {
      {"Fluency", {"perplexity"}},
      {"Diversity", {"distinct1", "distinct2", "entropy"}},
      {"Self-similarity (lower is more diverse)", {"self_bleu", "self_rouge"}},
      {"Reference overlap", {"bleu", "rouge1", "rouge2", "rougeL", "rougeW"}},
  };
  return families;
}

inline std::string render_markdown(const MetricTable& table) {
  std::ostringstream os;
  os << "# Decoding strategy comparison\n\n";
  os << "Cells are means over successful records. Perplexity uses natural log and scores the "
        "generated continuation given the prompt; entropy is in bits; rougeW is a "
        "frequency-weighted n-gram recall.\n\n";
  os << "## Records\n\n| strategy | records | errors |\n|---|---|---|\n";
  for (const auto& row : table.rows) {
    os << "| " << row.strategy << " | " << row.records << " | " << row.errors << " |\n";
  }
  const auto present = table.metric_names();
  for (const auto& family : metric_families()) {
    std::vector<std::string_view> cols;
    for (auto m : family.metrics) {
      if (std::find(present.begin(), present.end(), m) != present.end()) cols.push_back(m);
    }
    if (cols.empty()) continue;
    os << "\n## " << family.title << "\n\n| strategy |";
    for (auto c : cols) os << ' ' << c << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) os << "---|";
    os << '\n';
    for (const auto& row : table.rows) {
      os << "| " << row.strategy << " |";
      for (auto c : cols) {
        auto it = row.metrics.find(std::string(c));
        os << ' ' << (it == row.metrics.end() ? std::string("n/a") : sig6(it->second.mean)) << " |";
      }
      os << '\n';
    }
  }
  return os.str();
}

inline std::string render_csv(const MetricTable& table) {
  std::ostringstream os;
  os << "strategy,metric,mean,min,max,count\n";
  const auto names = table.metric_names();
  for (const auto& row : table.rows) {
    for (const auto& name : names) {
      os << row.strategy << ',' << name << ',';
      auto it = row.metrics.find(name);
      if (it == row.metrics.end()) {
        os << ",,,0\n";
      } else {
        const Aggregate& a = it->second;
        os << sig6(a.mean) << ',' << sig6(a.min) << ',' << sig6(a.max) << ',' << a.count << '\n';
      }
    }
  }
  return os.str();
}

}  // namespace detail

inline nlohmann::json report_to_json(const MetricTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [name, a] : row.metrics) {
      metrics[name] = {{"mean", a.mean}, {"min", a.min}, {"max", a.max}, {"count", a.count}};
    }
    rows.push_back({{"strategy", row.strategy},
                    {"records", row.records},
                    {"errors", row.errors},
                    {"metrics", std::move(metrics)}});
  }
  return {{"schema", 1},
          {"units", {{"perplexity", "natural log, continuation given prompt"}, {"entropy", "bits"}}},
          {"notes", {{"rougeW", "frequency-weighted n-gram recall, not weighted-LCS"}}},
          {"strategies", std::move(rows)}};
}

inline MetricTable report_from_json(const nlohmann::json& j) {
  try {
    MetricTable table;
    for (const auto& r : j.at("strategies")) {
      StrategyRow row;
      r.at("strategy").get_to(row.strategy);
      r.at("records").get_to(row.records);
      r.at("errors").get_to(row.errors);
      for (const auto& [name, a] : r.at("metrics").items()) {
        row.metrics[name] = Aggregate{a.at("mean").get<double>(), a.at("min").get<double>(),
                                      a.at("max").get<double>(), a.at("count").get<std::size_t>()};
      }
      table.rows.push_back(std::move(row));
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParseError, std::string("report json: ") + e.what());
  }
}

/// md: one table per metric family, strategies as rows. csv: flat
/// (strategy, metric, mean, min, max, count) rows. json: full precision tree.
inline std::string render_report(const MetricTable& table, ReportFormat format) {
  switch (format) {
    case ReportFormat::kMarkdown: return detail::render_markdown(table);
    case ReportFormat::kCsv: return detail::render_csv(table);
    case ReportFormat::kJson: return report_to_json(table).dump(2) + "\n";
  }
  return {};
}

}  // namespace decode_lab

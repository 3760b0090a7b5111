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

// decode-lab: train n-gram models, decode with any strategy, score text and
// run strategy comparisons.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "decode_lab/decode_lab.hpp"

namespace dl = decode_lab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void add_generation_flags(CLI::App* cmd, dl::GenerationConfig& cfg) {
  cmd->add_option("--max-length", cfg.max_length, "tokens to emit (prompt excluded)");
  cmd->add_option("--num-beams", cfg.num_beams, "beam width");
  cmd->add_option("--top-k", cfg.top_k, "top-k size (0 disables)");
  cmd->add_option("--top-p", cfg.top_p, "nucleus mass threshold");
  cmd->add_option("--typical-p", cfg.typical_p, "locally typical mass threshold");
  cmd->add_option("--temperature", cfg.temperature, "softmax temperature");
  cmd->add_option("--penalty-alpha", cfg.penalty_alpha, "contrastive degeneration penalty");
  cmd->add_option("--candidate-k", cfg.candidate_k, "contrastive candidate pool size");
  cmd->add_option("--no-repeat-ngram-size", cfg.no_repeat_ngram_size, "ban repeated n-grams (0 disables)");
  cmd->add_option("--seed", cfg.seed, "random seed (DECODE_LAB_SEED overrides)");
}

void apply_seed_override(dl::GenerationConfig& cfg) {
  const char* env = std::getenv("DECODE_LAB_SEED");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || end == env || *end != '\0' || env[0] == '-') {
    throw dl::Error(dl::Errc::kInvalidArgument, "DECODE_LAB_SEED must be an unsigned integer");
  }
  cfg.seed = v;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw dl::Error(dl::Errc::kIoError, "cannot write " + path);
  out << content;
  if (!out) throw dl::Error(dl::Errc::kIoError, "write failed for " + path);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dl::Error(dl::Errc::kIoError, "cannot read " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

int cmd_train(const std::string& corpus, int order, double k, const std::string& out) {
  auto model = dl::train_ngram(dl::read_corpus(corpus), order, k);
  model.save(out);
  std::cout << "trained " << model.descriptor() << " -> " << out << '\n';
  return kExitOk;
}

int cmd_generate(const std::string& model_spec, const std::string& strategy, const std::string& prompt,
                 dl::GenerationConfig cfg, bool json) {
  apply_seed_override(cfg);
  auto model = dl::load_model(model_spec);
  auto result = dl::generate(*model, prompt, strategy, cfg);
  if (json) {
    std::cout << nlohmann::json(result).dump(2) << '\n';
  } else {
    std::string prefix = dl::detokenize(result.prompt, model->vocab(), true);
    std::cout << prefix << (prefix.empty() || result.text.empty() ? "" : " ") << result.text << '\n';
  }
  return kExitOk;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

int cmd_eval(const std::string& candidate_path, const std::vector<std::string>& reference_paths,
             const std::vector<std::string>& metrics, const std::string& model_spec) {
  auto candidates = read_lines(candidate_path);
  if (candidates.empty()) throw dl::Error(dl::Errc::kEmptyInput, candidate_path + " has no lines");
  std::vector<std::vector<std::string>> references;
  for (const auto& path : reference_paths) {
    auto lines = read_lines(path);
    if (lines.size() != candidates.size()) {
      throw dl::Error(dl::Errc::kInvalidArgument,
                      path + " has " + std::to_string(lines.size()) + " lines, candidate has " +
                          std::to_string(candidates.size()));
    }
    references.push_back(std::move(lines));
  }
  std::unique_ptr<dl::LanguageModel> model;

  for (const auto& name : metrics) {
    const auto& info = dl::metric_info(name);
    double value = 0.0;
    if (info.scope == dl::MetricScope::kReference) {
      if (references.empty()) throw dl::Error(dl::Errc::kInvalidArgument, name + " needs --references");
      std::vector<double> per_line;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        std::vector<std::string> refs;
        for (const auto& r : references) refs.push_back(r[i]);
        if (name == "bleu") {
          per_line.push_back(dl::bleu(candidates[i], refs).value);
        } else {
          double best = 0.0;
          for (const auto& ref : refs) {
            double v = name == "rouge1"   ? dl::rouge_n(candidates[i], ref, 1).value
                       : name == "rouge2" ? dl::rouge_n(candidates[i], ref, 2).value
                       : name == "rougeL" ? dl::rouge_l(candidates[i], ref).value
                                          : dl::rouge_w(candidates[i], ref, 1).value;
            best = std::max(best, v);
          }
          per_line.push_back(best);
        }
      }
      value = mean_of(per_line);
    } else if (info.scope == dl::MetricScope::kPool) {
      value = name == "distinct1"   ? dl::distinct_n(candidates, 1)
              : name == "distinct2" ? dl::distinct_n(candidates, 2)
                                    : dl::token_entropy(candidates);
    } else if (info.scope == dl::MetricScope::kGroup) {
      value = dl::self_metric(candidates, name == "self_bleu" ? dl::SelfBase::kBleu : dl::SelfBase::kRougeL);
    } else {
      if (model_spec.empty()) throw dl::Error(dl::Errc::kInvalidArgument, "perplexity needs --model");
      if (!model) model = dl::load_model(model_spec);
      std::vector<double> per_line;
      for (const auto& c : candidates) per_line.push_back(dl::perplexity(*model, c).value);
      value = mean_of(per_line);
    }
    std::printf("%s\t%.6g\n", name.c_str(), value);
  }
  return kExitOk;
}

int cmd_compare(const std::string& model_spec, const std::vector<std::string>& strategies,
                const std::string& prompts_path, std::size_t samples, const std::string& report_path,
                const std::string& format, const std::string& runs_path, std::size_t threads,
                dl::GenerationConfig cfg) {
  apply_seed_override(cfg);
  const auto fmt = dl::parse_report_format(format);
  auto model = dl::load_model(model_spec);
  auto prompts = dl::ingest_prompts(prompts_path);
  dl::ComparisonOptions options{strategies, samples, threads};
  auto records = dl::run_comparison(*model, model->descriptor(), prompts, cfg, options);
  if (!runs_path.empty()) dl::persist_runs(records, runs_path);
  auto table = dl::aggregate_report(records);
  const std::string rendered = dl::render_report(table, fmt);
  if (report_path.empty() || report_path == "-") {
    std::cout << rendered;
  } else {
    write_file(report_path, rendered);
  }
  std::size_t errors = 0;
  for (const auto& r : records) errors += r.ok() ? 0 : 1;
  std::cerr << records.size() << " records, " << errors << " errors\n";
  return kExitOk;
}

int cmd_sidecar_check(const std::string& endpoint) {
  auto client = dl::SidecarClient::connect(endpoint);
  std::cout << "handshake ok: |V|=" << client->vocab().size()
            << " version=" << client->protocol_version()
            << " embeddings=" << (client->has_embeddings() ? "yes" : "no") << '\n';
  const dl::TokenSeq empty;
  auto first = client->next_distribution(empty);
  auto second = client->next_distribution(empty);
  if (!first.is_valid()) throw dl::Error(dl::Errc::kBadDistribution, "distribution not normalized");
  if (!(first == second)) throw dl::Error(dl::Errc::kBadDistribution, "repeated query changed the distribution");
  std::cout << "query ok: support=" << first.support() << ", repeated query identical\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decode-lab: decoding strategies and generation metrics"};
  app.require_subcommand(1);

  std::string corpus, out_path;
  int order = 3;
  double k = 0.01;
  auto* train = app.add_subcommand("train", "train an add-k n-gram model on a corpus (one document per line)");
  train->add_option("--corpus", corpus, "corpus file")->required();
  train->add_option("--order", order, "n-gram order")->check(CLI::PositiveNumber);
  train->add_option("--k", k, "add-k smoothing constant")->check(CLI::PositiveNumber);
  train->add_option("--out", out_path, "output model file")->required();

  std::string model_spec, strategy, prompt;
  bool json = false;
  dl::GenerationConfig gen_cfg;
  auto* gen = app.add_subcommand("generate", "decode a continuation for one prompt");
  gen->add_option("--model", model_spec, "model file or stdio:/tcp: sidecar endpoint")->required();
  gen->add_option("--strategy", strategy, "greedy|beam|top_k|top_p|typical|contrastive")->required();
  gen->add_option("--prompt", prompt, "prompt text")->required();
  gen->add_flag("--json", json, "print the full generation result as JSON");
  add_generation_flags(gen, gen_cfg);

  std::string candidate_path, eval_model;
  std::vector<std::string> reference_paths, metric_names;
  auto* eval = app.add_subcommand("eval", "score candidate lines against references");
  eval->add_option("--candidate", candidate_path, "one generation per line")->required();
  eval->add_option("--references", reference_paths, "reference files, line-aligned with the candidate");
  eval->add_option("--metrics", metric_names, "comma-separated metric names")->delimiter(',')->required();
  eval->add_option("--model", eval_model, "model for perplexity");

  std::string cmp_model, prompts_path, report_path, format = "md", runs_path;
  std::vector<std::string> strategies;
  std::size_t samples = 8, threads = 1;
  dl::GenerationConfig cmp_cfg;
  auto* compare = app.add_subcommand("compare", "run strategies over a prompt file and write a report");
  compare->add_option("--model", cmp_model, "model file or sidecar endpoint")->required();
  compare->add_option("--strategies", strategies, "comma-separated strategy names")->delimiter(',')->required();
  compare->add_option("--prompts", prompts_path, "prompt file, one per line")->required();
  compare->add_option("--samples", samples, "samples per prompt for sampling strategies");
  compare->add_option("--report", report_path, "report output path ('-' for stdout)");
  compare->add_option("--format", format, "md|csv|json");
  compare->add_option("--runs", runs_path, "also write run records as JSONL");
  compare->add_option("--threads", threads, "worker threads (0 = all cores)");
  add_generation_flags(compare, cmp_cfg);

  std::string endpoint;
  auto* check = app.add_subcommand("sidecar-check", "handshake with a sidecar and sanity-check one query");
  check->add_option("--endpoint", endpoint, "stdio:CMD or tcp:host:port")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(corpus, order, k, out_path);
    if (*gen) return cmd_generate(model_spec, strategy, prompt, gen_cfg, json);
    if (*eval) return cmd_eval(candidate_path, reference_paths, metric_names, eval_model);
    if (*compare) {
      return cmd_compare(cmp_model, strategies, prompts_path, samples, report_path, format, runs_path,
                         threads, cmp_cfg);
    }
    if (*check) return cmd_sidecar_check(endpoint);
  } catch (const dl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dl::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

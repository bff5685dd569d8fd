// minutes: run and evaluate long-meeting summarization experiments against
// chat-completion backends (or the offline mock backend).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minutes/bench.hpp"
#include "minutes/config.hpp"
#include "minutes/corpus.hpp"
#include "minutes/costing.hpp"
#include "minutes/metrics.hpp"
#include "minutes/pipeline.hpp"
#include "minutes/prompting.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUserError = 1;
constexpr int kExitInfraError = 2;

using namespace minutes;

class UserError : public std::runtime_error {
 public:
  explicit UserError(const std::string& msg) : std::runtime_error(msg) {}
};

// temp file + rename, so readers never observe a partial document
void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") std::cout << content;
  else write_atomic(out_path, content);
}

prompting::TemplateId parse_prompt_or_throw(const std::string& s) {
  auto id = prompting::parse_template_id(s);
  if (!id) throw UserError("unknown prompt id \"" + s + "\"");
  return *id;
}

pipeline::StrategyKind parse_strategy_or_throw(const std::string& s) {
  auto k = pipeline::parse_strategy_kind(s);
  if (!k) throw UserError("unknown strategy \"" + s + "\"");
  return *k;
}

struct CommonOpts {
  std::string config_path;
  config::AppConfig app;

  void load() {
    if (!config_path.empty()) app = config::load_app_config(config_path);
  }
  prompting::PromptRegistry registry() const {
    if (app.prompt_registry_path)
      return prompting::PromptRegistry::load(*app.prompt_registry_path);
    return prompting::PromptRegistry::defaults();
  }
};

int cmd_corpus_validate(const std::string& path) {
  auto c = corpus::load_corpus(path);
  std::cout << "ok: " << c.transcripts.size() << " transcripts, "
            << c.references.size() << " references\n";
  return kExitOk;
}

int cmd_corpus_stats(const std::string& path) {
  auto c = corpus::load_corpus(path);
  auto s = corpus::corpus_stats(c);
  std::cout << "corpus: " << c.name << "\n"
            << "meetings: " << s.meeting_count << "\n"
            << "mean transcript words: " << bench::format_fixed(s.mean_transcript_words)
            << "\n"
            << "mean reference words: " << bench::format_fixed(s.mean_reference_words)
            << "\n";
  return kExitOk;
}

int cmd_run(CommonOpts& common, const std::string& corpus_path,
            const std::vector<std::string>& provider_names,
            const std::vector<std::string>& strategy_names,
            const std::vector<std::string>& prompt_names,
            std::vector<size_t> n_values, const std::string& out_path,
            int parallelism, bool resume, bool no_speakers,
            const std::string& separator) {
  common.load();
  auto c = corpus::load_corpus(corpus_path, !no_speakers);

  std::vector<std::shared_ptr<provider::Provider>> providers;
  for (const auto& name : provider_names)
    providers.push_back(config::make_provider(name, common.app));

  std::vector<pipeline::StrategyKind> kinds;
  for (const auto& s : strategy_names) kinds.push_back(parse_strategy_or_throw(s));
  std::vector<prompting::TemplateId> prompts;
  for (const auto& p : prompt_names) prompts.push_back(parse_prompt_or_throw(p));
  if (n_values.empty()) n_values.push_back(common.app.defaults.n);
  for (size_t n : n_values)
    if (n < 1) throw UserError("--max-words must be >= 1");

  pipeline::PipelineConfig cfg;
  cfg.registry = common.registry();
  cfg.separator = separator;
  cfg.include_speakers = !no_speakers;
  if (providers.size() == 1)
    cfg.pricing = config::find_pricing(common.app, provider_names.front());

  pipeline::RunStore store(out_path);
  if (parallelism < 1) parallelism = common.app.defaults.parallelism;
  auto result =
      pipeline::run_grid(c, providers, kinds, prompts, n_values, cfg, &store,
                         parallelism, resume);
  size_t failed = 0;
  for (const auto& r : result.new_records)
    if (r.error) ++failed;
  std::cout << result.new_records.size() << " records written to " << out_path
            << " (" << result.skipped << " skipped";
  if (failed) std::cout << ", " << failed << " failed";
  std::cout << ")\n";
  return failed ? kExitInfraError : kExitOk;
}

int cmd_score(const std::string& runs_path, const std::string& corpus_path,
              const std::string& out_path, const std::string& scorer_url,
              bool stemming) {
  auto records = pipeline::read_records(runs_path);
  if (records.empty()) throw UserError("no run records in " + runs_path);
  auto c = corpus::load_corpus(corpus_path);
  metrics::MetricTokenization tok;
  tok.stemming = stemming;

  std::string out;
  for (const auto& rec : records) {
    const auto* ref = c.find_reference(rec.transcript_id);
    if (!ref)
      throw UserError("transcript \"" + rec.transcript_id +
                      "\" has no reference summary in " + corpus_path);
    auto report = metrics::score_run(rec, *ref, tok);
    if (!scorer_url.empty()) {
      auto ext = metrics::external_score(rec.final_summary, ref->text, scorer_url);
      if (ext) report.external_scores[ext->first] = ext->second;
    }
    out += metrics::to_json(report).dump() + "\n";
  }
  emit(out_path, out);
  if (!out_path.empty() && out_path != "-")
    std::cerr << records.size() << " score reports written to " << out_path << "\n";
  return kExitOk;
}

int cmd_cost(const std::string& pricing_path, const std::string& runs_path) {
  auto tables = config::load_pricing(pricing_path);
  auto records = pipeline::read_records(runs_path);
  if (records.empty()) throw UserError("no run records in " + runs_path);
  double grand_total = 0.0;
  for (const auto& rec : records) {
    const costing::PricingTable* table = nullptr;
    for (const auto& t : tables)
      if (t.provider_name == rec.provider_name) table = &t;
    if (!table)
      throw UserError("no pricing entry for provider \"" + rec.provider_name + "\"");
    auto est =
        costing::estimate_cost(*table, rec.total_input_tokens, rec.total_output_tokens);
    grand_total += est.total;
    std::cout << rec.transcript_id << " " << rec.provider_name << " "
              << pipeline::to_string(rec.strategy) << " $" << est.total << "\n";
  }
  std::cout << "total: $" << grand_total << "\n";
  return kExitOk;
}

int cmd_cost_ratio(const std::string& pricing_path, const std::string& a,
                   const std::string& b) {
  auto tables = config::load_pricing(pricing_path);
  const costing::PricingTable *ta = nullptr, *tb = nullptr;
  for (const auto& t : tables) {
    if (t.provider_name == a) ta = &t;
    if (t.provider_name == b) tb = &t;
  }
  if (!ta) throw UserError("no pricing entry for \"" + a + "\"");
  if (!tb) throw UserError("no pricing entry for \"" + b + "\"");
  std::cout << a << " / " << b << " = " << costing::cost_ratio(*ta, *tb) << "\n";
  return kExitOk;
}

int cmd_bench(CommonOpts& common, const std::string& corpus_path,
              const std::string& provider_name, const std::string& strategy_name,
              const std::string& prompt_name, size_t n) {
  common.load();
  auto c = corpus::load_corpus(corpus_path);
  auto backend = config::make_provider(provider_name, common.app);
  pipeline::Strategy strategy;
  strategy.kind = parse_strategy_or_throw(strategy_name);
  strategy.n = n ? n : common.app.defaults.n;
  strategy.prompt = parse_prompt_or_throw(prompt_name);
  pipeline::PipelineConfig cfg;
  cfg.registry = common.registry();

  auto stats = bench::bench_latency(c, *backend, strategy, cfg);
  std::cout << "samples: " << stats.sample_count << "\n"
            << "failures: " << stats.failure_count << "\n"
            << "mean: " << stats.mean << " s\n"
            << "median: " << stats.median << " s\n"
            << "p95: " << stats.p95 << " s\n"
            << "failure-adjusted mean: " << stats.failure_adjusted_mean << " s\n";
  return kExitOk;
}

int cmd_report(const std::string& runs_path, const std::string& scores_path,
               const std::string& group_by_spec, const std::string& format_name,
               bool cross_dataset, const std::string& out_path) {
  auto records = pipeline::read_records(runs_path);
  std::vector<metrics::ScoreReport> reports;
  {
    std::ifstream in(scores_path);
    if (!in) throw UserError("cannot open scores file: " + scores_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      reports.push_back(metrics::report_from_json(nlohmann::json::parse(line)));
    }
  }
  std::vector<bench::GroupField> group_by;
  std::stringstream ss(group_by_spec);
  std::string field;
  while (std::getline(ss, field, ',')) {
    auto f = bench::parse_group_field(field);
    if (!f) throw UserError("unknown group-by field \"" + field + "\"");
    group_by.push_back(*f);
  }
  if (group_by.empty()) throw UserError("--group-by must name at least one field");

  bench::ReportFormat format;
  if (format_name == "markdown") format = bench::ReportFormat::Markdown;
  else if (format_name == "csv") format = bench::ReportFormat::Csv;
  else throw UserError("unknown format \"" + format_name + "\"");

  auto rows = cross_dataset
                  ? bench::aggregate_cross_dataset(reports, records, group_by)
                  : bench::aggregate(reports, records, group_by);
  emit(out_path, bench::emit_report(rows, format, group_by));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minutes: long-meeting summarization runs and evaluation"};
  app.require_subcommand(1);

  CommonOpts common;

  // corpus validate | stats
  auto* corpus_cmd = app.add_subcommand("corpus", "Corpus validation and statistics");
  corpus_cmd->require_subcommand(1);
  std::string corpus_file;
  auto* validate_cmd = corpus_cmd->add_subcommand("validate", "Validate a corpus file");
  validate_cmd->add_option("path", corpus_file, "Corpus file (JSONL)")->required();
  auto* stats_cmd = corpus_cmd->add_subcommand("stats", "Print corpus statistics");
  stats_cmd->add_option("path", corpus_file, "Corpus file (JSONL)")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "Execute a summarization grid");
  std::string run_corpus, run_out = "runs.jsonl", run_separator = "\n";
  std::vector<std::string> run_providers, run_strategies{"truncation"},
      run_prompts{"summarize"};
  std::vector<size_t> run_n;
  int run_parallelism = 0;
  bool run_resume = false, run_no_speakers = false;
  run_cmd->add_option("--corpus", run_corpus, "Corpus file")->required();
  run_cmd->add_option("--provider", run_providers, "Provider name(s)")->required();
  run_cmd->add_option("--strategy", run_strategies,
                      "truncation|chapter_concat|chapter_rewrite|chapter_resummarize");
  run_cmd->add_option("--prompt", run_prompts, "Prompt template id(s)");
  run_cmd->add_option("--max-words", run_n, "Max input words n (repeatable)");
  run_cmd->add_option("--out", run_out, "Run-record store (JSONL)");
  run_cmd->add_option("--parallelism", run_parallelism, "In-flight request limit");
  run_cmd->add_flag("--resume", run_resume, "Skip cells already in the store");
  run_cmd->add_flag("--no-speakers", run_no_speakers,
                    "Do not render speaker names into prompt bodies");
  run_cmd->add_option("--separator", run_separator, "Chapter-summary join separator");
  run_cmd->add_option("--config", common.config_path, "App config file");

  // score
  auto* score_cmd = app.add_subcommand("score", "Score run records against references");
  std::string score_runs, score_corpus, score_out, score_url;
  bool score_stemming = false;
  score_cmd->add_option("--runs", score_runs, "Run-record store")->required();
  score_cmd->add_option("--corpus", score_corpus, "Corpus file")->required();
  score_cmd->add_option("--out", score_out, "Score report output (JSONL; default stdout)");
  score_cmd->add_option("--scorer-url", score_url, "External scorer endpoint");
  score_cmd->add_flag("--stemming", score_stemming, "Apply Porter stemming");

  // cost + cost ratio
  auto* cost_cmd = app.add_subcommand("cost", "Estimate API cost of run records");
  std::string cost_pricing, cost_runs, ratio_a, ratio_b;
  cost_cmd->add_option("--pricing", cost_pricing, "Pricing config file")->required();
  cost_cmd->add_option("--runs", cost_runs, "Run-record store");
  auto* ratio_cmd = cost_cmd->add_subcommand("ratio", "Mean per-1K-token price ratio");
  ratio_cmd->fallthrough();
  ratio_cmd->add_option("provider_a", ratio_a, "Numerator provider")->required();
  ratio_cmd->add_option("provider_b", ratio_b, "Denominator provider")->required();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark per-transcript latency");
  std::string bench_corpus, bench_provider, bench_strategy = "truncation",
              bench_prompt = "summarize";
  size_t bench_n = 0;
  bench_cmd->add_option("--corpus", bench_corpus, "Corpus file")->required();
  bench_cmd->add_option("--provider", bench_provider, "Provider name")->required();
  bench_cmd->add_option("--strategy", bench_strategy, "Strategy kind");
  bench_cmd->add_option("--prompt", bench_prompt, "Prompt template id");
  bench_cmd->add_option("--max-words", bench_n, "Max input words n");
  bench_cmd->add_option("--config", common.config_path, "App config file");

  // report
  auto* report_cmd = app.add_subcommand("report", "Aggregate scores into tables");
  std::string report_runs, report_scores, report_group = "provider,strategy",
              report_format = "markdown", report_out;
  bool report_cross = false;
  report_cmd->add_option("--runs", report_runs, "Run-record store")->required();
  report_cmd->add_option("--scores", report_scores, "Score reports (JSONL)")->required();
  report_cmd->add_option("--group-by", report_group,
                         "Comma-separated: dataset,provider,strategy,prompt,n");
  report_cmd->add_option("--format", report_format, "markdown|csv");
  report_cmd->add_flag("--cross-dataset", report_cross,
                       "Average per-dataset means (mean of means)");
  report_cmd->add_option("--out", report_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUserError;
  }

  try {
    if (validate_cmd->parsed()) return cmd_corpus_validate(corpus_file);
    if (stats_cmd->parsed()) return cmd_corpus_stats(corpus_file);
    if (run_cmd->parsed())
      return cmd_run(common, run_corpus, run_providers, run_strategies, run_prompts,
                     run_n, run_out, run_parallelism, run_resume, run_no_speakers,
                     run_separator);
    if (score_cmd->parsed())
      return cmd_score(score_runs, score_corpus, score_out, score_url, score_stemming);
    if (ratio_cmd->parsed()) return cmd_cost_ratio(cost_pricing, ratio_a, ratio_b);
    if (cost_cmd->parsed()) {
      if (cost_runs.empty())
        throw UserError("cost: --runs is required (or use `cost ratio`)");
      return cmd_cost(cost_pricing, cost_runs);
    }
    if (bench_cmd->parsed())
      return cmd_bench(common, bench_corpus, bench_provider, bench_strategy,
                       bench_prompt, bench_n);
    if (report_cmd->parsed())
      return cmd_report(report_runs, report_scores, report_group, report_format,
                        report_cross, report_out);
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const corpus::CorpusError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const config::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const prompting::PromptError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const provider::ProviderError& e) {
    std::cerr << "provider error: " << e.what() << " (after " << e.attempts
              << " attempts)\n";
    return kExitInfraError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfraError;
  }
  return kExitUserError;
}

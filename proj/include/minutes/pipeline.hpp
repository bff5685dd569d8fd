#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "minutes/corpus.hpp"
#include "minutes/costing.hpp"
#include "minutes/prompting.hpp"
#include "minutes/provider.hpp"
#include "minutes/segmenter.hpp"

namespace minutes::pipeline {

enum class StrategyKind { Truncation, ChapterConcat, ChapterRewrite, ChapterResummarize };

inline constexpr std::array<StrategyKind, 4> kAllStrategyKinds = {
    StrategyKind::Truncation, StrategyKind::ChapterConcat,
    StrategyKind::ChapterRewrite, StrategyKind::ChapterResummarize};

inline std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::Truncation: return "truncation";
    case StrategyKind::ChapterConcat: return "chapter_concat";
    case StrategyKind::ChapterRewrite: return "chapter_rewrite";
    case StrategyKind::ChapterResummarize: return "chapter_resummarize";
  }
  return "truncation";
}

inline std::optional<StrategyKind> parse_strategy_kind(std::string_view s) {
  for (StrategyKind k : kAllStrategyKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct Strategy {
  StrategyKind kind = StrategyKind::Truncation;
  size_t n = 2500;
  prompting::TemplateId prompt = prompting::TemplateId::Summarize;
};

struct PipelineConfig {
  prompting::PromptRegistry registry = prompting::PromptRegistry::defaults();
  std::string separator = "\n";  // chapter-summary join separator
  bool include_speakers = true;
  int merge_depth_limit = 3;
  std::optional<costing::PricingTable> pricing;
};

struct RunRecord {
  std::string corpus_name;
  std::string transcript_id;
  std::string provider_name;
  StrategyKind strategy = StrategyKind::Truncation;
  std::string prompt_id;
  size_t n = 2500;
  std::vector<std::string> chapter_summaries;
  std::string final_summary;
  int64_t total_input_tokens = 0;
  int64_t total_output_tokens = 0;
  double total_latency = 0.0;  // seconds, retries included
  double clean_latency = 0.0;  // seconds, successful attempts only
  int call_count = 0;
  int failure_count = 0;
  double cost = 0.0;
  std::string created_at;
  std::optional<std::string> error;  // set on terminal failure
};

inline std::string cell_key(const RunRecord& r) {
  return r.corpus_name + "|" + r.transcript_id + "|" + r.provider_name + "|" +
         std::string(to_string(r.strategy)) + "|" + r.prompt_id + "|" +
         std::to_string(r.n);
}

inline std::string now_iso8601_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j{
      {"corpus_name", r.corpus_name},
      {"transcript_id", r.transcript_id},
      {"provider_name", r.provider_name},
      {"strategy", std::string(to_string(r.strategy))},
      {"prompt_id", r.prompt_id},
      {"n", r.n},
      {"chapter_summaries", r.chapter_summaries},
      {"final_summary", r.final_summary},
      {"total_input_tokens", r.total_input_tokens},
      {"total_output_tokens", r.total_output_tokens},
      {"total_latency", r.total_latency},
      {"clean_latency", r.clean_latency},
      {"call_count", r.call_count},
      {"failure_count", r.failure_count},
      {"cost", r.cost},
      {"created_at", r.created_at},
  };
  if (r.error) j["error"] = *r.error;
  return j;
}

inline RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.corpus_name = j.at("corpus_name").get<std::string>();
  r.transcript_id = j.at("transcript_id").get<std::string>();
  r.provider_name = j.at("provider_name").get<std::string>();
  auto kind = parse_strategy_kind(j.at("strategy").get<std::string>());
  if (!kind) throw std::runtime_error("run record: unknown strategy kind");
  r.strategy = *kind;
  r.prompt_id = j.at("prompt_id").get<std::string>();
  r.n = j.at("n").get<size_t>();
  r.chapter_summaries = j.at("chapter_summaries").get<std::vector<std::string>>();
  r.final_summary = j.at("final_summary").get<std::string>();
  r.total_input_tokens = j.at("total_input_tokens").get<int64_t>();
  r.total_output_tokens = j.at("total_output_tokens").get<int64_t>();
  r.total_latency = j.at("total_latency").get<double>();
  r.clean_latency = j.value("clean_latency", 0.0);
  r.call_count = j.at("call_count").get<int>();
  r.failure_count = j.at("failure_count").get<int>();
  r.cost = j.at("cost").get<double>();
  r.created_at = j.at("created_at").get<std::string>();
  if (j.contains("error")) r.error = j["error"].get<std::string>();
  return r;
}

inline std::vector<RunRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  std::vector<RunRecord> out;
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

namespace detail {

// Folds one completion into the record's accounting.
inline void account(RunRecord& r, const provider::CompletionOutcome& out,
                    const PipelineConfig& cfg) {
  r.total_input_tokens += out.input_tokens;
  r.total_output_tokens += out.output_tokens;
  r.total_latency += out.latency.count();
  r.clean_latency += out.final_attempt_latency.count();
  r.call_count += 1;
  r.failure_count += out.failed_attempts;
  if (cfg.pricing)
    r.cost += costing::estimate_cost(*cfg.pricing, out.input_tokens,
                                     out.output_tokens).total;
}

inline void account_failure(RunRecord& r, const provider::ProviderError& e) {
  r.total_latency += e.elapsed.count();
  r.call_count += 1;
  r.failure_count += e.attempts;
}

inline RunRecord make_record(const std::string& corpus_name,
                             const corpus::Transcript& t,
                             const std::string& provider_name,
                             const Strategy& s) {
  RunRecord r;
  r.corpus_name = corpus_name;
  r.transcript_id = t.id;
  r.provider_name = provider_name;
  r.strategy = s.kind;
  r.prompt_id = std::string(prompting::to_string(s.prompt));
  r.n = s.n;
  r.created_at = now_iso8601_utc();
  return r;
}

// Hierarchical reduction for Rewrite/Resummarize merge inputs that exceed the
// n-word window: re-chapterize the joined summaries and reduce again, up to
// cfg.merge_depth_limit levels, after which a single oversized call is made.
inline std::string merge_reduce(const std::string& body,
                                prompting::TemplateId merge_template,
                                const Strategy& s, const PipelineConfig& cfg,
                                provider::Provider& backend, RunRecord& rec,
                                int depth) {
  auto words = text::split_words(body);
  if (words.size() <= s.n || depth >= cfg.merge_depth_limit) {
    auto prompt = prompting::render(cfg.registry.get(merge_template),
                                    text::join_words(words));
    auto out = backend.complete(prompt);
    account(rec, out, cfg);
    return out.text;
  }
  std::vector<std::string> partials;
  for (const auto& ch : segmenter::chapterize(words, s.n)) {
    auto prompt = prompting::render(cfg.registry.get(merge_template),
                                    text::join_words(ch.words));
    auto out = backend.complete(prompt);
    account(rec, out, cfg);
    partials.push_back(out.text);
  }
  return merge_reduce(text::join_words(partials, cfg.separator), merge_template,
                      s, cfg, backend, rec, depth + 1);
}

}  // namespace detail

// Single call on the first n words of the flattened transcript.
inline RunRecord summarize_truncation(const corpus::Transcript& t,
                                      provider::Provider& backend,
                                      const Strategy& s,
                                      const PipelineConfig& cfg,
                                      const std::string& corpus_name = "") {
  if (t.utterances.empty())
    throw std::invalid_argument("summarize_truncation: empty transcript");
  RunRecord rec = detail::make_record(corpus_name, t, backend.name(), s);
  auto words = segmenter::truncate(corpus::flatten(t, cfg.include_speakers), s.n);
  auto prompt =
      prompting::render(cfg.registry.get(s.prompt), text::join_words(words));
  try {
    auto out = backend.complete(prompt);
    detail::account(rec, out, cfg);
    rec.final_summary = out.text;
    rec.chapter_summaries = {out.text};
  } catch (const provider::ProviderError& e) {
    detail::account_failure(rec, e);
    rec.error = e.what();
  }
  return rec;
}

enum class MergeKind { Concat, Rewrite, Resummarize };

inline MergeKind merge_of(StrategyKind k) {
  switch (k) {
    case StrategyKind::ChapterRewrite: return MergeKind::Rewrite;
    case StrategyKind::ChapterResummarize: return MergeKind::Resummarize;
    default: return MergeKind::Concat;
  }
}

// Chapterize, summarize each chapter with the same prompt as truncation, then
// merge. Single-chapter transcripts skip the merge call.
inline RunRecord summarize_chapterized(const corpus::Transcript& t,
                                       MergeKind merge,
                                       provider::Provider& backend,
                                       const Strategy& s,
                                       const PipelineConfig& cfg,
                                       const std::string& corpus_name = "") {
  if (t.utterances.empty())
    throw std::invalid_argument("summarize_chapterized: empty transcript");
  RunRecord rec = detail::make_record(corpus_name, t, backend.name(), s);
  auto chapters =
      segmenter::chapterize(corpus::flatten(t, cfg.include_speakers), s.n);
  try {
    for (const auto& ch : chapters) {
      auto prompt = prompting::render(cfg.registry.get(s.prompt),
                                      text::join_words(ch.words));
      auto out = backend.complete(prompt);
      detail::account(rec, out, cfg);
      rec.chapter_summaries.push_back(out.text);
    }
    if (rec.chapter_summaries.size() == 1) {
      rec.final_summary = rec.chapter_summaries.front();
      return rec;
    }
    std::string joined = text::join_words(rec.chapter_summaries, cfg.separator);
    switch (merge) {
      case MergeKind::Concat:
        rec.final_summary = joined;
        break;
      case MergeKind::Rewrite:
        rec.final_summary = detail::merge_reduce(
            joined, prompting::TemplateId::Rewrite, s, cfg, backend, rec, 0);
        break;
      case MergeKind::Resummarize:
        rec.final_summary = detail::merge_reduce(
            joined, prompting::TemplateId::Resummarize, s, cfg, backend, rec, 0);
        break;
    }
  } catch (const provider::ProviderError& e) {
    // completed chapter summaries stay on the error record
    detail::account_failure(rec, e);
    rec.error = e.what();
  }
  return rec;
}

inline RunRecord run_cell(const corpus::Transcript& t,
                          provider::Provider& backend, const Strategy& s,
                          const PipelineConfig& cfg,
                          const std::string& corpus_name) {
  if (s.kind == StrategyKind::Truncation)
    return summarize_truncation(t, backend, s, cfg, corpus_name);
  return summarize_chapterized(t, merge_of(s.kind), backend, s, cfg, corpus_name);
}

// Append-only newline-delimited JSON store; one serialized writer.
class RunStore {
 public:
  explicit RunStore(std::string path) : path_(std::move(path)) {}

  std::set<std::string> existing_keys() const {
    std::set<std::string> keys;
    for (const auto& r : read_records(path_)) keys.insert(cell_key(r));
    return keys;
  }

  void append(const RunRecord& r) {
    std::lock_guard<std::mutex> lock(mu_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw std::runtime_error("cannot open run store: " + path_);
    out << to_json(r).dump() << '\n';
    out.flush();
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::mutex mu_;
};

struct GridResult {
  std::vector<RunRecord> new_records;
  size_t skipped = 0;
};

// Cartesian product of transcripts x providers x strategy kinds x prompts x
// n values, executed with bounded parallelism. Completed cells are persisted
// incrementally; with resume=true, cells already in the store are skipped.
inline GridResult run_grid(
    const corpus::Corpus& corpus,
    const std::vector<std::shared_ptr<provider::Provider>>& providers,
    const std::vector<StrategyKind>& kinds,
    const std::vector<prompting::TemplateId>& prompts,
    const std::vector<size_t>& n_values, const PipelineConfig& cfg,
    RunStore* store = nullptr, int parallelism = 4, bool resume = false) {
  if (corpus.transcripts.empty() || providers.empty() || kinds.empty() ||
      prompts.empty() || n_values.empty())
    throw std::invalid_argument("run_grid: empty grid axis");

  struct Cell {
    const corpus::Transcript* transcript;
    provider::Provider* backend;
    Strategy strategy;
  };
  std::vector<Cell> cells;
  std::set<std::string> done;
  if (resume && store) done = store->existing_keys();

  GridResult result;
  for (const auto& backend : providers)
    for (StrategyKind kind : kinds)
      for (prompting::TemplateId prompt : prompts)
        for (size_t n : n_values)
          for (const auto& t : corpus.transcripts) {
            Strategy s{kind, n, prompt};
            RunRecord probe = detail::make_record(corpus.name, t, backend->name(), s);
            if (done.count(cell_key(probe))) {
              ++result.skipped;
              continue;
            }
            cells.push_back(Cell{&t, backend.get(), s});
          }

  std::vector<RunRecord> records(cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
      const Cell& c = cells[i];
      records[i] = run_cell(*c.transcript, *c.backend, c.strategy, cfg, corpus.name);
      if (store) store->append(records[i]);
    }
  };
  size_t threads = std::max<size_t>(1, std::min<size_t>(parallelism, cells.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  result.new_records = std::move(records);
  return result;
}

}  // namespace minutes::pipeline

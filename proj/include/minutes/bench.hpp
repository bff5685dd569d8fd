#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "minutes/metrics.hpp"
#include "minutes/pipeline.hpp"

namespace minutes::bench {

struct LatencySample {
  std::string transcript_id;
  double duration = 0.0;        // seconds, retries included
  double clean_duration = 0.0;  // successful attempts only
  int attempts = 1;
  bool failed = false;
};

struct LatencyStats {
  double mean = 0.0;    // plain: successful-only, retry time excluded
  double median = 0.0;
  double p95 = 0.0;
  double min = 0.0;
  double max = 0.0;
  double failure_adjusted_mean = 0.0;  // all samples, retry time included
  size_t sample_count = 0;
  size_t failure_count = 0;  // samples that terminally failed
};

// Nearest-rank percentile over sorted samples.
inline double nearest_rank(const std::vector<double>& sorted, double pct) {
  size_t rank = static_cast<size_t>(
      std::ceil(pct / 100.0 * static_cast<double>(sorted.size())));
  if (rank == 0) rank = 1;
  return sorted[std::min(rank, sorted.size()) - 1];
}

inline LatencyStats compute_latency_stats(const std::vector<LatencySample>& samples) {
  LatencyStats stats;
  stats.sample_count = samples.size();
  std::vector<double> clean;
  double adjusted_sum = 0.0;
  for (const auto& s : samples) {
    adjusted_sum += s.duration;
    if (s.failed) ++stats.failure_count;
    else clean.push_back(s.clean_duration);
  }
  if (clean.empty())
    throw std::runtime_error("all transcripts failed; no latency statistics");
  std::sort(clean.begin(), clean.end());
  double sum = 0.0;
  for (double d : clean) sum += d;
  stats.mean = sum / static_cast<double>(clean.size());
  stats.median = nearest_rank(clean, 50.0);
  stats.p95 = nearest_rank(clean, 95.0);
  stats.min = clean.front();
  stats.max = clean.back();
  stats.failure_adjusted_mean = adjusted_sum / static_cast<double>(samples.size());
  return stats;
}

// Runs the strategy over every transcript (serial by default, for latency
// fidelity) and reduces the per-transcript wall-clock durations.
inline LatencyStats bench_latency(const corpus::Corpus& corpus,
                                  provider::Provider& backend,
                                  const pipeline::Strategy& strategy,
                                  const pipeline::PipelineConfig& cfg,
                                  std::vector<LatencySample>* out_samples = nullptr) {
  if (corpus.transcripts.empty())
    throw std::invalid_argument("bench_latency: empty corpus");
  std::vector<LatencySample> samples;
  for (const auto& t : corpus.transcripts) {
    auto rec = pipeline::run_cell(t, backend, strategy, cfg, corpus.name);
    samples.push_back(LatencySample{
        t.id, rec.total_latency, rec.clean_latency,
        rec.call_count + rec.failure_count, rec.error.has_value()});
  }
  if (out_samples) *out_samples = samples;
  return compute_latency_stats(samples);
}

enum class GroupField { Dataset, Provider, Strategy, Prompt, ContextWords };

inline std::string_view to_string(GroupField f) {
  switch (f) {
    case GroupField::Dataset: return "dataset";
    case GroupField::Provider: return "provider";
    case GroupField::Strategy: return "strategy";
    case GroupField::Prompt: return "prompt";
    case GroupField::ContextWords: return "n";
  }
  return "dataset";
}

inline std::optional<GroupField> parse_group_field(std::string_view s) {
  for (GroupField f : {GroupField::Dataset, GroupField::Provider, GroupField::Strategy,
                       GroupField::Prompt, GroupField::ContextWords})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

inline std::string field_value(const pipeline::RunRecord& r, GroupField f) {
  switch (f) {
    case GroupField::Dataset: return r.corpus_name;
    case GroupField::Provider: return r.provider_name;
    case GroupField::Strategy: return std::string(pipeline::to_string(r.strategy));
    case GroupField::Prompt: return r.prompt_id;
    case GroupField::ContextWords: return std::to_string(r.n);
  }
  return {};
}

struct AggregateRow {
  std::vector<std::string> key;  // one value per group field, in field order
  double mean_r1 = 0.0;
  double mean_r2 = 0.0;
  double mean_rl = 0.0;
  double mean_length = 0.0;
  size_t count = 0;
};

// Reports and records are parallel sequences: reports[i] scores records[i].
inline void check_joined(const std::vector<metrics::ScoreReport>& reports,
                         const std::vector<pipeline::RunRecord>& records) {
  if (reports.size() != records.size())
    throw std::invalid_argument("aggregate: " + std::to_string(reports.size()) +
                                " reports vs " + std::to_string(records.size()) +
                                " records");
  for (size_t i = 0; i < reports.size(); ++i)
    if (reports[i].transcript_id != records[i].transcript_id)
      throw std::invalid_argument("aggregate: orphan report for transcript \"" +
                                  reports[i].transcript_id + "\" at position " +
                                  std::to_string(i));
}

// Unweighted arithmetic means of the F1 scores and candidate lengths within
// each group.
inline std::vector<AggregateRow> aggregate(
    const std::vector<metrics::ScoreReport>& reports,
    const std::vector<pipeline::RunRecord>& records,
    const std::vector<GroupField>& group_by) {
  check_joined(reports, records);
  std::map<std::vector<std::string>, AggregateRow> groups;
  for (size_t i = 0; i < reports.size(); ++i) {
    std::vector<std::string> key;
    for (GroupField f : group_by) key.push_back(field_value(records[i], f));
    AggregateRow& row = groups[key];
    row.key = key;
    row.mean_r1 += reports[i].rouge1.f1;
    row.mean_r2 += reports[i].rouge2.f1;
    row.mean_rl += reports[i].rougeL.f1;
    row.mean_length += static_cast<double>(reports[i].candidate_word_count);
    row.count += 1;
  }
  std::vector<AggregateRow> rows;
  for (auto& [key, row] : groups) {
    double n = static_cast<double>(row.count);
    row.mean_r1 /= n;
    row.mean_r2 /= n;
    row.mean_rl /= n;
    row.mean_length /= n;
    rows.push_back(std::move(row));
  }
  return rows;  // std::map iteration gives a stable key sort
}

// Cross-dataset averaging: per-dataset means first, then the unweighted mean
// of those means, so datasets of unequal size weigh equally.
inline std::vector<AggregateRow> aggregate_cross_dataset(
    const std::vector<metrics::ScoreReport>& reports,
    const std::vector<pipeline::RunRecord>& records,
    const std::vector<GroupField>& group_by) {
  std::vector<GroupField> inner = group_by;
  inner.insert(inner.begin(), GroupField::Dataset);
  auto per_dataset = aggregate(reports, records, inner);

  std::map<std::vector<std::string>, std::vector<const AggregateRow*>> groups;
  for (const auto& row : per_dataset) {
    std::vector<std::string> key(row.key.begin() + 1, row.key.end());
    groups[key].push_back(&row);
  }
  std::vector<AggregateRow> rows;
  for (auto& [key, members] : groups) {
    AggregateRow out;
    out.key = key;
    for (const auto* m : members) {
      out.mean_r1 += m->mean_r1;
      out.mean_r2 += m->mean_r2;
      out.mean_rl += m->mean_rl;
      out.mean_length += m->mean_length;
      out.count += m->count;
    }
    double k = static_cast<double>(members.size());
    out.mean_r1 /= k;
    out.mean_r2 /= k;
    out.mean_rl /= k;
    out.mean_length /= k;
    rows.push_back(std::move(out));
  }
  return rows;
}

enum class ReportFormat { Markdown, Csv };

inline std::string format_fixed(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

// Deterministic rendering: fixed column order, 2-decimal values, rows sorted
// by group key.
inline std::string emit_report(const std::vector<AggregateRow>& rows,
                               ReportFormat format,
                               const std::vector<GroupField>& group_by) {
  if (rows.empty()) throw std::invalid_argument("emit_report: no rows");
  std::vector<AggregateRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const AggregateRow& a, const AggregateRow& b) { return a.key < b.key; });

  std::vector<std::string> header;
  for (GroupField f : group_by) header.emplace_back(to_string(f));
  for (const char* col : {"R-1", "R-2", "R-L", "Length", "Count"})
    header.emplace_back(col);

  auto row_cells = [](const AggregateRow& r) {
    std::vector<std::string> cells = r.key;
    cells.push_back(format_fixed(r.mean_r1));
    cells.push_back(format_fixed(r.mean_r2));
    cells.push_back(format_fixed(r.mean_rl));
    cells.push_back(format_fixed(r.mean_length));
    cells.push_back(std::to_string(r.count));
    return cells;
  };

  std::string out;
  if (format == ReportFormat::Csv) {
    out = text::join_words(header, ",") + "\n";
    for (const auto& r : sorted) out += text::join_words(row_cells(r), ",") + "\n";
  } else {
    out = "| " + text::join_words(header, " | ") + " |\n|";
    for (size_t i = 0; i < header.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& r : sorted)
      out += "| " + text::join_words(row_cells(r), " | ") + " |\n";
  }
  return out;
}

}  // namespace minutes::bench

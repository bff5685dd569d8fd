#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "minutes/bench.hpp"

using namespace minutes;
using bench::GroupField;

namespace {

corpus::Corpus make_corpus(size_t transcripts, size_t words_each) {
  corpus::Corpus c;
  c.name = "bench";
  for (size_t i = 0; i < transcripts; ++i) {
    corpus::Transcript t;
    t.id = "t" + std::to_string(i);
    std::string body;
    for (size_t w = 0; w < words_each; ++w) {
      if (w) body += ' ';
      body += "w" + std::to_string(w);
    }
    t.utterances.push_back({std::nullopt, body});
    t.word_count = words_each;
    c.transcripts.push_back(std::move(t));
  }
  return c;
}

std::pair<metrics::ScoreReport, pipeline::RunRecord> make_pair(
    const std::string& dataset, const std::string& provider,
    pipeline::StrategyKind strategy, const std::string& id, double r1,
    size_t length) {
  metrics::ScoreReport rep;
  rep.transcript_id = id;
  rep.rouge1.f1 = r1;
  rep.rouge2.f1 = r1 / 2;
  rep.rougeL.f1 = r1 / 3;
  rep.candidate_word_count = length;
  pipeline::RunRecord rec;
  rec.transcript_id = id;
  rec.corpus_name = dataset;
  rec.provider_name = provider;
  rec.strategy = strategy;
  rec.prompt_id = "summarize";
  rec.n = 2500;
  return {rep, rec};
}

}  // namespace

TEST_CASE("single-sample statistics collapse to the sample") {
  std::vector<bench::LatencySample> samples{{"t0", 1.0, 1.0, 1, false}};
  auto stats = bench::compute_latency_stats(samples);
  CHECK(stats.mean == 1.0);
  CHECK(stats.median == 1.0);
  CHECK(stats.p95 == 1.0);
  CHECK(stats.failure_adjusted_mean == 1.0);
  CHECK(stats.sample_count == 1);
}

TEST_CASE("percentile ordering holds on random samples") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(0.1, 20.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<bench::LatencySample> samples;
    size_t n = 1 + rng() % 40;
    for (size_t i = 0; i < n; ++i) {
      double d = dist(rng);
      samples.push_back({"t" + std::to_string(i), d, d, 1, false});
    }
    auto stats = bench::compute_latency_stats(samples);
    CHECK(stats.p95 >= stats.median);
    CHECK(stats.median >= stats.min);
    CHECK(stats.max >= stats.p95);
    CHECK(stats.failure_adjusted_mean == Catch::Approx(stats.mean));
  }
}

TEST_CASE("fixed 2.5s mock latency gives a 2.5s mean over 100 transcripts") {
  auto c = make_corpus(100, 20);
  provider::MockParams p;
  p.call_latency = provider::Duration(2.5);
  provider::MockProvider backend(p);
  pipeline::Strategy s{pipeline::StrategyKind::Truncation, 2500};
  auto stats = bench::bench_latency(c, backend, s, {});
  CHECK(stats.sample_count == 100);
  CHECK(stats.mean == Catch::Approx(2.5).epsilon(0.05));
  CHECK(stats.failure_adjusted_mean == Catch::Approx(stats.mean));
  CHECK(stats.failure_count == 0);
}

TEST_CASE("scripted retries push the failure-adjusted mean above the plain mean") {
  auto c = make_corpus(20, 20);
  provider::MockParams p;
  p.call_latency = provider::Duration(11.0);
  p.fail_first_attempts = 2;
  p.max_attempts = 3;
  provider::MockProvider backend(p);
  pipeline::Strategy s{pipeline::StrategyKind::Truncation, 2500};
  auto stats = bench::bench_latency(c, backend, s, {});
  CHECK(stats.mean == Catch::Approx(11.0));
  CHECK(stats.failure_adjusted_mean > stats.mean);
}

TEST_CASE("all-failed benchmark yields an error, not statistics") {
  std::vector<bench::LatencySample> samples{{"t0", 5.0, 0.0, 3, true}};
  CHECK_THROWS(bench::compute_latency_stats(samples));
}

TEST_CASE("cross-dataset average is the mean of per-dataset means") {
  std::vector<metrics::ScoreReport> reports;
  std::vector<pipeline::RunRecord> records;
  double dataset_means[] = {0.30, 0.20, 0.10};
  for (int d = 0; d < 3; ++d) {
    // unequal dataset sizes: 1, 2, 3 reports with the given mean
    for (int i = 0; i <= d; ++i) {
      auto [rep, rec] =
          make_pair("ds" + std::to_string(d), "mock",
                    pipeline::StrategyKind::Truncation,
                    "t" + std::to_string(d) + "_" + std::to_string(i),
                    dataset_means[d], 100);
      reports.push_back(rep);
      records.push_back(rec);
    }
  }
  auto rows = bench::aggregate_cross_dataset(reports, records,
                                             {GroupField::Provider});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean_r1 == Catch::Approx(0.20).margin(1e-12));
  CHECK(rows[0].count == 6);
}

TEST_CASE("single group aggregation equals the per-report mean") {
  std::vector<metrics::ScoreReport> reports;
  std::vector<pipeline::RunRecord> records;
  for (int i = 0; i < 4; ++i) {
    auto [rep, rec] = make_pair("ds", "mock", pipeline::StrategyKind::Truncation,
                                "t" + std::to_string(i), 0.1 * (i + 1), 50 + i);
    reports.push_back(rep);
    records.push_back(rec);
  }
  auto rows = bench::aggregate(reports, records, {GroupField::Provider});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean_r1 == Catch::Approx(0.25));
  CHECK(rows[0].mean_length == Catch::Approx(51.5));
  CHECK(rows[0].count == 4);
}

TEST_CASE("aggregation is permutation invariant") {
  std::vector<metrics::ScoreReport> reports;
  std::vector<pipeline::RunRecord> records;
  std::mt19937 rng(3);
  for (int i = 0; i < 12; ++i) {
    auto kind = pipeline::kAllStrategyKinds[i % 4];
    auto [rep, rec] = make_pair("ds" + std::to_string(i % 2), "mock", kind,
                                "t" + std::to_string(i),
                                std::uniform_real_distribution<>(0, 1)(rng), 10 + i);
    reports.push_back(rep);
    records.push_back(rec);
  }
  auto baseline = bench::aggregate(reports, records,
                                   {GroupField::Dataset, GroupField::Strategy});

  std::vector<size_t> order(reports.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<metrics::ScoreReport> shuffled_reports;
  std::vector<pipeline::RunRecord> shuffled_records;
  for (size_t i : order) {
    shuffled_reports.push_back(reports[i]);
    shuffled_records.push_back(records[i]);
  }
  auto shuffled = bench::aggregate(shuffled_reports, shuffled_records,
                                   {GroupField::Dataset, GroupField::Strategy});
  REQUIRE(baseline.size() == shuffled.size());
  for (size_t i = 0; i < baseline.size(); ++i) {
    CHECK(baseline[i].key == shuffled[i].key);
    CHECK(baseline[i].mean_r1 == Catch::Approx(shuffled[i].mean_r1).margin(1e-12));
    CHECK(baseline[i].count == shuffled[i].count);
  }
}

TEST_CASE("orphan report is rejected") {
  auto [rep, rec] = make_pair("ds", "mock", pipeline::StrategyKind::Truncation,
                              "t0", 0.5, 10);
  rep.transcript_id = "somebody_else";
  CHECK_THROWS_AS(bench::aggregate({rep}, {rec}, {GroupField::Provider}),
                  std::invalid_argument);
}

TEST_CASE("report emission is deterministic and sorted by group key") {
  std::vector<metrics::ScoreReport> reports;
  std::vector<pipeline::RunRecord> records;
  // insert strategies out of order
  for (auto kind : {pipeline::StrategyKind::Truncation,
                    pipeline::StrategyKind::ChapterRewrite,
                    pipeline::StrategyKind::ChapterConcat,
                    pipeline::StrategyKind::ChapterResummarize}) {
    auto [rep, rec] = make_pair("ds", "mock", kind,
                                std::string(pipeline::to_string(kind)), 0.5, 100);
    reports.push_back(rep);
    records.push_back(rec);
  }
  auto rows = bench::aggregate(reports, records, {GroupField::Strategy});
  auto doc1 = bench::emit_report(rows, bench::ReportFormat::Markdown,
                                 {GroupField::Strategy});
  auto doc2 = bench::emit_report(rows, bench::ReportFormat::Markdown,
                                 {GroupField::Strategy});
  CHECK(doc1 == doc2);

  // rows appear in sorted strategy order
  auto pos = [&](std::string_view name) { return doc1.find(name); };
  CHECK(pos("chapter_concat") < pos("chapter_resummarize"));
  CHECK(pos("chapter_resummarize") < pos("chapter_rewrite"));
  CHECK(pos("chapter_rewrite") < pos("truncation"));

  auto csv = bench::emit_report(rows, bench::ReportFormat::Csv,
                                {GroupField::Strategy});
  CHECK(csv.rfind("strategy,R-1,R-2,R-L,Length,Count\n", 0) == 0);

  CHECK_THROWS_AS(bench::emit_report({}, bench::ReportFormat::Csv,
                                     {GroupField::Strategy}),
                  std::invalid_argument);
}

// Independent recomputation of an aggregation, spreadsheet style: scan the
// joined rows once per group with plain accumulators.
TEST_CASE("aggregate matches an independent recomputation") {
  std::vector<metrics::ScoreReport> reports;
  std::vector<pipeline::RunRecord> records;
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dist(0, 1);
  for (int i = 0; i < 24; ++i) {
    auto [rep, rec] = make_pair("ds" + std::to_string(i % 3),
                                i % 2 ? "mock_a" : "mock_b",
                                pipeline::kAllStrategyKinds[i % 4],
                                "t" + std::to_string(i), dist(rng),
                                static_cast<size_t>(rng() % 300));
    reports.push_back(rep);
    records.push_back(rec);
  }
  auto rows = bench::aggregate(reports, records,
                               {GroupField::Provider, GroupField::Strategy});
  for (const auto& row : rows) {
    double sum_r1 = 0, sum_len = 0;
    size_t count = 0;
    for (size_t i = 0; i < reports.size(); ++i) {
      if (records[i].provider_name != row.key[0]) continue;
      if (std::string(pipeline::to_string(records[i].strategy)) != row.key[1]) continue;
      sum_r1 += reports[i].rouge1.f1;
      sum_len += static_cast<double>(reports[i].candidate_word_count);
      ++count;
    }
    REQUIRE(count == row.count);
    CHECK(row.mean_r1 == Catch::Approx(sum_r1 / count).margin(1e-12));
    CHECK(row.mean_length == Catch::Approx(sum_len / count).margin(1e-12));
  }
}

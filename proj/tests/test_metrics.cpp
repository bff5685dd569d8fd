#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "minutes/metrics.hpp"

using namespace minutes;
using metrics::RougeScore;

namespace oracle {

// Test-only reimplementation, kept deliberately naive and map-free so it
// cannot share a bug with the production path.

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> ngrams(const std::vector<std::string>& t,
                                             size_t order) {
  std::vector<std::vector<std::string>> out;
  for (size_t i = 0; i + order <= t.size(); ++i)
    out.push_back({t.begin() + static_cast<ptrdiff_t>(i),
                   t.begin() + static_cast<ptrdiff_t>(i + order)});
  return out;
}

// Clipped overlap by exhaustive multiset intersection: greedily pair up equal
// grams, consuming each reference gram at most once.
size_t clipped_overlap(std::vector<std::vector<std::string>> cand,
                       std::vector<std::vector<std::string>> ref) {
  size_t overlap = 0;
  for (const auto& g : cand) {
    for (auto it = ref.begin(); it != ref.end(); ++it) {
      if (*it == g) {
        ++overlap;
        ref.erase(it);
        break;
      }
    }
  }
  return overlap;
}

RougeScore rouge_n(const std::string& cand, const std::string& ref, size_t order) {
  auto cg = ngrams(tokens(cand), order);
  auto rg = ngrams(tokens(ref), order);
  size_t m = clipped_overlap(cg, rg);
  double p = cg.empty() ? 0.0 : double(m) / double(cg.size());
  double r = double(m) / double(rg.size());
  return metrics::make_score(p, r);
}

// LCS by exhaustive subsequence enumeration over the candidate (<= 2^12 masks).
size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  size_t best = 0;
  for (uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    std::vector<std::string> sub;
    for (size_t i = 0; i < a.size(); ++i)
      if (mask & (1u << i)) sub.push_back(a[i]);
    size_t j = 0;
    for (const auto& w : b) {
      if (j < sub.size() && w == sub[j]) ++j;
    }
    if (j == sub.size()) best = std::max(best, sub.size());
  }
  return best;
}

RougeScore rouge_l(const std::string& cand, const std::string& ref) {
  auto c = tokens(cand);
  auto r = tokens(ref);
  size_t l = lcs(c, r);
  double p = c.empty() ? 0.0 : double(l) / double(c.size());
  double rc = double(l) / double(r.size());
  return metrics::make_score(p, rc);
}

std::string random_sentence(std::mt19937& rng, size_t max_len = 12) {
  static const char* alphabet[] = {"alpha", "beta", "gamma", "delta", "eps"};
  std::uniform_int_distribution<size_t> len_dist(0, max_len);
  std::uniform_int_distribution<size_t> sym_dist(0, 4);
  size_t len = len_dist(rng);
  std::string out;
  for (size_t i = 0; i < len; ++i) {
    if (i) out += ' ';
    out += alphabet[sym_dist(rng)];
  }
  return out;
}

}  // namespace oracle

TEST_CASE("worked ROUGE example: the cat sat vs the cat ate") {
  auto r1 = metrics::rouge_n("the cat sat", "the cat ate", 1);
  CHECK(r1.precision == Catch::Approx(2.0 / 3.0).margin(1e-9));
  CHECK(r1.recall == Catch::Approx(2.0 / 3.0).margin(1e-9));
  CHECK(r1.f1 == Catch::Approx(2.0 / 3.0).margin(1e-9));

  auto r2 = metrics::rouge_n("the cat sat", "the cat ate", 2);
  CHECK(r2.f1 == Catch::Approx(0.5).margin(1e-9));

  auto rl = metrics::rouge_l("the cat sat", "the cat ate");
  CHECK(rl.f1 == Catch::Approx(2.0 / 3.0).margin(1e-9));
}

TEST_CASE("identity, disjoint, and empty-candidate cases") {
  for (size_t order : {1u, 2u}) {
    auto s = metrics::rouge_n("the cat sat", "the cat sat", order);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == 1.0);
  }
  auto disjoint = metrics::rouge_l("aa bb cc", "xx yy zz");
  CHECK(disjoint.f1 == 0.0);

  auto empty = metrics::rouge_l("", "the cat");
  CHECK(empty.precision == 0.0);
  CHECK(empty.recall == 0.0);
  CHECK(empty.f1 == 0.0);

  CHECK_THROWS_AS(metrics::rouge_n("abc", "", 1), std::invalid_argument);
  CHECK_THROWS_AS(metrics::rouge_n("a b c", "single", 2), std::invalid_argument);
  CHECK_THROWS_AS(metrics::rouge_l("abc", "..."), std::invalid_argument);
}

TEST_CASE("rouge matches the brute-force oracle on random pairs") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    std::string cand = oracle::random_sentence(rng);
    std::string ref = oracle::random_sentence(rng);
    if (oracle::tokens(ref).empty()) continue;

    for (size_t order : {1u, 2u}) {
      if (oracle::ngrams(oracle::tokens(ref), order).empty()) continue;
      auto got = metrics::rouge_n(cand, ref, order);
      auto want = oracle::rouge_n(cand, ref, order);
      CHECK(got.precision == want.precision);
      CHECK(got.recall == want.recall);
      CHECK(got.f1 == want.f1);
    }
    auto got = metrics::rouge_l(cand, ref);
    auto want = oracle::rouge_l(cand, ref);
    CHECK(got.precision == want.precision);
    CHECK(got.recall == want.recall);
    CHECK(got.f1 == want.f1);
  }
}

TEST_CASE("score component invariants on random pairs") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::string cand = oracle::random_sentence(rng);
    std::string ref = oracle::random_sentence(rng);
    if (oracle::tokens(ref).empty() || oracle::tokens(cand).empty()) continue;

    auto r1 = metrics::rouge_n(cand, ref, 1);
    auto rl = metrics::rouge_l(cand, ref);
    for (const auto& s : {r1, rl}) {
      CHECK(s.precision >= 0.0);
      CHECK(s.precision <= 1.0);
      CHECK(s.recall >= 0.0);
      CHECK(s.recall <= 1.0);
      CHECK(s.f1 <= std::max(s.precision, s.recall) + 1e-12);
    }
    // LCS length cannot exceed clipped unigram overlap
    CHECK(rl.f1 <= r1.f1 + 1e-12);

    // f1 symmetry under candidate/reference swap
    auto swapped = metrics::rouge_n(ref, cand, 1);
    CHECK(swapped.precision == Catch::Approx(r1.recall).margin(1e-12));
    CHECK(swapped.recall == Catch::Approx(r1.precision).margin(1e-12));
    CHECK(swapped.f1 == Catch::Approx(r1.f1).margin(1e-12));
  }
}

TEST_CASE("ROUGE-1 depends only on the token multiset") {
  std::string cand = "delta alpha beta alpha";
  std::string ref = "beta beta alpha gamma";
  auto base = metrics::rouge_n(cand, ref, 1);
  auto permuted = metrics::rouge_n("alpha alpha beta delta", "gamma alpha beta beta", 1);
  CHECK(base.precision == permuted.precision);
  CHECK(base.recall == permuted.recall);
  CHECK(base.f1 == permuted.f1);
}

TEST_CASE("tokenization options") {
  metrics::MetricTokenization plain;
  CHECK(metrics::tokenize("The CAT, sat!", plain) ==
        std::vector<std::string>{"the", "cat", "sat"});
  metrics::MetricTokenization keep_case;
  keep_case.lowercase = false;
  CHECK(metrics::tokenize("The CAT", keep_case) ==
        std::vector<std::string>{"The", "CAT"});
  metrics::MetricTokenization stemmed;
  stemmed.stemming = true;
  CHECK(metrics::tokenize("running runs caresses", stemmed) ==
        std::vector<std::string>{"run", "run", "caress"});
}

TEST_CASE("score_run scores the final summary against its reference") {
  pipeline::RunRecord rec;
  rec.transcript_id = "m1";
  rec.final_summary = "the cat sat";
  corpus::ReferenceSummary ref{"m1", "the cat sat", 3};

  auto report = metrics::score_run(rec, ref);
  CHECK(report.rouge1.f1 == 1.0);
  CHECK(report.rouge2.f1 == 1.0);
  CHECK(report.rougeL.f1 == 1.0);
  CHECK(report.candidate_word_count == 3);
  CHECK_FALSE(report.degenerate);

  rec.final_summary.clear();
  auto degenerate = metrics::score_run(rec, ref);
  CHECK(degenerate.degenerate);
  CHECK(degenerate.rouge1.f1 == 0.0);

  corpus::ReferenceSummary wrong{"m2", "text", 1};
  CHECK_THROWS_AS(metrics::score_run(rec, wrong), std::invalid_argument);
}

TEST_CASE("score reports serialize and parse back") {
  pipeline::RunRecord rec;
  rec.transcript_id = "m1";
  rec.final_summary = "the cat sat on the mat";
  corpus::ReferenceSummary ref{"m1", "the cat ate the mat", 5};
  auto report = metrics::score_run(rec, ref);
  report.external_scores["bertscore"] = 0.61;

  auto back = metrics::report_from_json(metrics::to_json(report));
  CHECK(back.transcript_id == report.transcript_id);
  CHECK(back.rouge1.f1 == report.rouge1.f1);
  CHECK(back.rougeL.recall == report.rougeL.recall);
  CHECK(back.candidate_word_count == report.candidate_word_count);
  CHECK(back.external_scores.at("bertscore") == 0.61);
}

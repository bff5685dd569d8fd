#pragma once

#include <algorithm>
#include <cctype>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "minutes/corpus.hpp"
#include "minutes/pipeline.hpp"
#include "minutes/stemmer.hpp"
#include "minutes/text.hpp"

namespace minutes::metrics {

struct MetricTokenization {
  bool lowercase = true;
  bool stemming = false;
};

// Token = maximal alphanumeric run; non-alphanumeric bytes are separators.
// Bytes >= 0x80 count as token characters so UTF-8 words survive intact.
inline std::vector<std::string> tokenize(std::string_view s,
                                         const MetricTokenization& tok = {}) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      if (tok.stemming) current = PorterStemmer::stem(current);
      tokens.push_back(std::move(current));
      current.clear();
    }
  };
  for (char c : s) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (uc >= 0x80 || std::isalnum(uc)) {
      current.push_back(tok.lowercase ? static_cast<char>(std::tolower(uc)) : c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline RougeScore make_score(double precision, double recall) {
  RougeScore s{precision, recall, 0.0};
  if (precision + recall > 0.0)
    s.f1 = 2.0 * precision * recall / (precision + recall);
  return s;
}

namespace detail {

inline std::map<std::vector<std::string>, int> ngram_counts(
    const std::vector<std::string>& tokens, size_t order) {
  std::map<std::vector<std::string>, int> counts;
  if (tokens.size() < order) return counts;
  for (size_t i = 0; i + order <= tokens.size(); ++i)
    ++counts[{tokens.begin() + static_cast<ptrdiff_t>(i),
              tokens.begin() + static_cast<ptrdiff_t>(i + order)}];
  return counts;
}

inline size_t lcs_length(const std::vector<std::string>& a,
                         const std::vector<std::string>& b) {
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) cur[j] = prev[j - 1] + 1;
      else cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace detail

// Clipped n-gram overlap (order 1 or 2).
inline RougeScore rouge_n(const std::string& candidate,
                          const std::string& reference, size_t order,
                          const MetricTokenization& tok = {}) {
  if (order < 1 || order > 2) throw std::invalid_argument("rouge_n: order must be 1 or 2");
  auto cand_counts = detail::ngram_counts(tokenize(candidate, tok), order);
  auto ref_counts = detail::ngram_counts(tokenize(reference, tok), order);
  size_t ref_total = 0;
  for (const auto& [g, c] : ref_counts) ref_total += static_cast<size_t>(c);
  if (ref_total == 0)
    throw std::invalid_argument("rouge_n: reference has no n-grams of order " +
                                std::to_string(order));
  size_t cand_total = 0, overlap = 0;
  for (const auto& [gram, count] : cand_counts) {
    cand_total += static_cast<size_t>(count);
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end())
      overlap += static_cast<size_t>(std::min(count, it->second));
  }
  double precision =
      cand_total ? static_cast<double>(overlap) / static_cast<double>(cand_total) : 0.0;
  double recall = static_cast<double>(overlap) / static_cast<double>(ref_total);
  return make_score(precision, recall);
}

// LCS-based overlap.
inline RougeScore rouge_l(const std::string& candidate,
                          const std::string& reference,
                          const MetricTokenization& tok = {}) {
  auto cand = tokenize(candidate, tok);
  auto ref = tokenize(reference, tok);
  if (ref.empty()) throw std::invalid_argument("rouge_l: reference has no tokens");
  size_t lcs = detail::lcs_length(cand, ref);
  double precision =
      cand.empty() ? 0.0 : static_cast<double>(lcs) / static_cast<double>(cand.size());
  double recall = static_cast<double>(lcs) / static_cast<double>(ref.size());
  return make_score(precision, recall);
}

struct ScoreReport {
  std::string transcript_id;
  RougeScore rouge1, rouge2, rougeL;
  size_t candidate_word_count = 0;
  std::map<std::string, double> external_scores;
  bool degenerate = false;  // empty candidate
  MetricTokenization tokenization;
};

inline ScoreReport score_run(const pipeline::RunRecord& record,
                             const corpus::ReferenceSummary& reference,
                             const MetricTokenization& tok = {}) {
  if (record.transcript_id != reference.transcript_id)
    throw std::invalid_argument("score_run: transcript id mismatch (" +
                                record.transcript_id + " vs " +
                                reference.transcript_id + ")");
  ScoreReport report;
  report.transcript_id = record.transcript_id;
  report.tokenization = tok;
  report.candidate_word_count = text::count_words(record.final_summary);
  if (tokenize(record.final_summary, tok).empty()) {
    report.degenerate = true;
    return report;
  }
  report.rouge1 = rouge_n(record.final_summary, reference.text, 1, tok);
  report.rouge2 = rouge_n(record.final_summary, reference.text, 2, tok);
  report.rougeL = rouge_l(record.final_summary, reference.text, tok);
  return report;
}

inline nlohmann::json to_json(const ScoreReport& r) {
  auto score_json = [](const RougeScore& s) {
    return nlohmann::json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  };
  nlohmann::json j{
      {"transcript_id", r.transcript_id},
      {"rouge1", score_json(r.rouge1)},
      {"rouge2", score_json(r.rouge2)},
      {"rougeL", score_json(r.rougeL)},
      {"candidate_word_count", r.candidate_word_count},
      {"degenerate", r.degenerate},
      {"tokenization",
       {{"lowercase", r.tokenization.lowercase}, {"stemming", r.tokenization.stemming}}},
  };
  if (!r.external_scores.empty()) j["external_scores"] = r.external_scores;
  return j;
}

inline ScoreReport report_from_json(const nlohmann::json& j) {
  auto score = [&](const char* key) {
    const auto& s = j.at(key);
    return RougeScore{s.at("precision").get<double>(), s.at("recall").get<double>(),
                      s.at("f1").get<double>()};
  };
  ScoreReport r;
  r.transcript_id = j.at("transcript_id").get<std::string>();
  r.rouge1 = score("rouge1");
  r.rouge2 = score("rouge2");
  r.rougeL = score("rougeL");
  r.candidate_word_count = j.at("candidate_word_count").get<size_t>();
  r.degenerate = j.value("degenerate", false);
  if (j.contains("tokenization")) {
    r.tokenization.lowercase = j["tokenization"].value("lowercase", true);
    r.tokenization.stemming = j["tokenization"].value("stemming", false);
  }
  if (j.contains("external_scores"))
    r.external_scores = j["external_scores"].get<std::map<std::string, double>>();
  return r;
}

// Delegates embedding-based scoring to an external HTTP endpoint:
// POST {"candidate": str, "reference": str} -> {"name": str, "score": real}.
// Endpoint trouble degrades to "no score" with a warning; it never fails a run.
inline std::optional<std::pair<std::string, double>> external_score(
    const std::string& candidate, const std::string& reference,
    const std::string& scorer_url) {
  try {
    auto url = provider::detail::parse_url(scorer_url);
    httplib::Client client(url.base);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(std::chrono::seconds(60));
    nlohmann::json body{{"candidate", candidate}, {"reference", reference}};
    auto res = client.Post(url.path, body.dump(), "application/json");
    if (!res || res->status != 200) {
      std::cerr << "warning: external scorer " << scorer_url << " unavailable";
      if (res) std::cerr << " (HTTP " << res->status << ")";
      std::cerr << "\n";
      return std::nullopt;
    }
    nlohmann::json j = nlohmann::json::parse(res->body);
    std::string name = j.at("name").get<std::string>();
    double score = j.at("score").get<double>();
    if (score < 0.0 || score > 1.0)
      std::cerr << "warning: external scorer \"" << name << "\" returned " << score
                << ", outside [0,1]; recording verbatim\n";
    return std::make_pair(name, score);
  } catch (const std::exception& e) {
    std::cerr << "warning: external scorer " << scorer_url << " failed: " << e.what()
              << "\n";
    return std::nullopt;
  }
}

}  // namespace minutes::metrics

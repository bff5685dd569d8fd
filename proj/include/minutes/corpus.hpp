#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "minutes/text.hpp"

namespace minutes::corpus {

struct Utterance {
  std::optional<std::string> speaker;
  std::string text;

  bool operator==(const Utterance&) const = default;
};

struct Transcript {
  std::string id;
  std::vector<Utterance> utterances;
  size_t word_count = 0;  // derived at load time

  bool operator==(const Transcript&) const = default;
};

struct ReferenceSummary {
  std::string transcript_id;
  std::string text;
  size_t word_count = 0;

  bool operator==(const ReferenceSummary&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<Transcript> transcripts;
  std::vector<ReferenceSummary> references;

  const Transcript* find_transcript(const std::string& id) const {
    for (const auto& t : transcripts)
      if (t.id == id) return &t;
    return nullptr;
  }
  const ReferenceSummary* find_reference(const std::string& transcript_id) const {
    for (const auto& r : references)
      if (r.transcript_id == transcript_id) return &r;
    return nullptr;
  }

  bool operator==(const Corpus&) const = default;
};

class CorpusError : public std::runtime_error {
 public:
  explicit CorpusError(const std::string& msg) : std::runtime_error(msg) {}
};

// "speaker: text" rendering when a speaker is present; controls both
// flatten() and the derived word counts.
inline std::vector<std::string> flatten(const Transcript& t,
                                        bool include_speakers = true) {
  std::vector<std::string> words;
  for (const auto& u : t.utterances) {
    std::string rendered;
    if (include_speakers && u.speaker) rendered = *u.speaker + ": " + u.text;
    else rendered = u.text;
    auto w = text::split_words(rendered);
    words.insert(words.end(), w.begin(), w.end());
  }
  return words;
}

inline bool has_non_whitespace(const std::string& s) {
  return !text::split_words(s).empty();
}

// Canonical corpus format: UTF-8 newline-delimited JSON, one record per line:
//   {"id": str, "utterances": [{"speaker": str?, "text": str}], "reference": str?}
// A line carrying only {"id", "reference"} attaches a reference to an
// already- or later-declared transcript; an unknown id is a dangling reference.
inline Corpus load_corpus(const std::string& path, bool include_speakers = true) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file: " + path);

  Corpus c;
  // Corpus name = file stem.
  size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  size_t dot = base.find_last_of('.');
  c.name = dot == std::string::npos ? base : base.substr(0, dot);

  std::set<std::string> seen_ids;
  std::map<std::string, std::string> pending_refs;  // id -> text, insertion-agnostic
  std::vector<std::pair<std::string, std::string>> refs_in_order;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fail = [&](const std::string& what) {
      throw CorpusError(path + ":" + std::to_string(line_no) + ": " + what);
    };
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("malformed record: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
      fail("malformed record: missing string field \"id\"");
    std::string id = j["id"].get<std::string>();
    if (id.empty()) fail("malformed record: empty id");

    bool has_utterances = j.contains("utterances") && !j["utterances"].empty();
    if (has_utterances) {
      if (!seen_ids.insert(id).second) fail("duplicate transcript id \"" + id + "\"");
      Transcript t;
      t.id = id;
      if (!j["utterances"].is_array()) fail("malformed record: \"utterances\" not an array");
      for (const auto& ju : j["utterances"]) {
        if (!ju.is_object() || !ju.contains("text") || !ju["text"].is_string())
          fail("malformed record: utterance missing string field \"text\"");
        Utterance u;
        u.text = ju["text"].get<std::string>();
        if (!has_non_whitespace(u.text)) fail("malformed record: empty utterance text");
        if (ju.contains("speaker") && !ju["speaker"].is_null()) {
          if (!ju["speaker"].is_string()) fail("malformed record: \"speaker\" not a string");
          u.speaker = ju["speaker"].get<std::string>();
        }
        t.utterances.push_back(std::move(u));
      }
      t.word_count = flatten(t, include_speakers).size();
      c.transcripts.push_back(std::move(t));
    }
    if (j.contains("reference") && !j["reference"].is_null()) {
      if (!j["reference"].is_string()) fail("malformed record: \"reference\" not a string");
      std::string ref = j["reference"].get<std::string>();
      if (!has_non_whitespace(ref)) fail("malformed record: empty reference text");
      if (pending_refs.count(id)) fail("duplicate reference for transcript \"" + id + "\"");
      pending_refs[id] = ref;
      refs_in_order.emplace_back(id, ref);
    } else if (!has_utterances) {
      fail("malformed record: neither utterances nor reference present");
    }
  }

  if (c.transcripts.empty()) throw CorpusError(path + ": empty corpus");

  for (auto& [id, ref] : refs_in_order) {
    if (!seen_ids.count(id))
      throw CorpusError(path + ": dangling reference for unknown transcript id \"" +
                        id + "\"");
    ReferenceSummary r;
    r.transcript_id = id;
    r.text = ref;
    r.word_count = text::count_words(ref);
    c.references.push_back(std::move(r));
  }
  return c;
}

// Serializes back to the canonical line format (inline references).
inline std::string serialize_corpus(const Corpus& c) {
  std::string out;
  for (const auto& t : c.transcripts) {
    nlohmann::json j;
    j["id"] = t.id;
    nlohmann::json utts = nlohmann::json::array();
    for (const auto& u : t.utterances) {
      nlohmann::json ju;
      if (u.speaker) ju["speaker"] = *u.speaker;
      ju["text"] = u.text;
      utts.push_back(std::move(ju));
    }
    j["utterances"] = std::move(utts);
    if (const auto* r = c.find_reference(t.id)) j["reference"] = r->text;
    out += j.dump();
    out += '\n';
  }
  return out;
}

struct CorpusStats {
  size_t meeting_count = 0;
  double mean_transcript_words = 0.0;
  double mean_reference_words = 0.0;
};

inline CorpusStats corpus_stats(const Corpus& c) {
  if (c.transcripts.empty()) throw CorpusError("empty corpus");
  CorpusStats s;
  s.meeting_count = c.transcripts.size();
  double tw = 0.0;
  for (const auto& t : c.transcripts) tw += static_cast<double>(t.word_count);
  s.mean_transcript_words = tw / static_cast<double>(c.transcripts.size());
  if (!c.references.empty()) {
    double rw = 0.0;
    for (const auto& r : c.references) rw += static_cast<double>(r.word_count);
    s.mean_reference_words = rw / static_cast<double>(c.references.size());
  }
  return s;
}

}  // namespace minutes::corpus

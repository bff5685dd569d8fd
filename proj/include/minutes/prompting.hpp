#pragma once

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace minutes::prompting {

enum class TemplateId {
  Summarize,
  Rewrite,
  Resummarize,
  SummarizeLong,
  SummarizeMedium,
  SummarizeShort,
};

inline constexpr std::array<TemplateId, 6> kAllTemplateIds = {
    TemplateId::Summarize,      TemplateId::Rewrite,
    TemplateId::Resummarize,    TemplateId::SummarizeLong,
    TemplateId::SummarizeMedium, TemplateId::SummarizeShort,
};

inline std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::Summarize: return "summarize";
    case TemplateId::Rewrite: return "rewrite";
    case TemplateId::Resummarize: return "resummarize";
    case TemplateId::SummarizeLong: return "summarize_long";
    case TemplateId::SummarizeMedium: return "summarize_medium";
    case TemplateId::SummarizeShort: return "summarize_short";
  }
  return "summarize";
}

// The registry is closed: unknown ids are rejected here, at parse time.
inline std::optional<TemplateId> parse_template_id(std::string_view s) {
  for (TemplateId id : kAllTemplateIds)
    if (to_string(id) == s) return id;
  return std::nullopt;
}

inline constexpr std::string_view kPlaceholder = "{body}";

struct PromptTemplate {
  TemplateId id = TemplateId::Summarize;
  std::string text;  // contains exactly one {body} slot
};

enum class LengthVariant { Long, Medium, Short };

class PromptError : public std::runtime_error {
 public:
  explicit PromptError(const std::string& msg) : std::runtime_error(msg) {}
};

inline size_t placeholder_count(std::string_view text) {
  size_t count = 0;
  for (size_t pos = text.find(kPlaceholder); pos != std::string_view::npos;
       pos = text.find(kPlaceholder, pos + kPlaceholder.size()))
    ++count;
  return count;
}

// Registry of exact prompt bytes. Defaults hold the templates used throughout;
// an on-disk registry file overrides them so run records capture the exact
// prompt text of an experiment.
class PromptRegistry {
 public:
  static PromptRegistry defaults() {
    PromptRegistry r;
    r.set(TemplateId::Summarize, "Summarize the following conversation: {body}");
    r.set(TemplateId::Rewrite,
          "Rewrite the following text by maintaining coherency: {body}");
    r.set(TemplateId::Resummarize, "Summarize the following text: {body}");
    r.set(TemplateId::SummarizeLong,
          "Generate a long and descriptive summary of the following "
          "conversation. {body}");
    r.set(TemplateId::SummarizeMedium,
          "Generate a summary of the following conversation. {body}");
    r.set(TemplateId::SummarizeShort,
          "Generate a very short and concise summary of the following "
          "conversation. {body}");
    return r;
  }

  static PromptRegistry load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PromptError("cannot open prompt registry: " + path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw PromptError("malformed prompt registry: " + std::string(e.what()));
    }
    PromptRegistry r = defaults();
    for (auto& [key, value] : j.items()) {
      auto id = parse_template_id(key);
      if (!id) throw PromptError("unknown template id \"" + key + "\"");
      if (!value.is_string()) throw PromptError("template \"" + key + "\" not a string");
      r.set(*id, value.get<std::string>());
    }
    return r;
  }

  void set(TemplateId id, std::string text) {
    if (placeholder_count(text) != 1)
      throw PromptError("template \"" + std::string(to_string(id)) +
                        "\" must contain exactly one {body} placeholder");
    templates_[id] = PromptTemplate{id, std::move(text)};
  }

  const PromptTemplate& get(TemplateId id) const { return templates_.at(id); }

  std::string dump() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, t] : templates_) j[std::string(to_string(id))] = t.text;
    return j.dump(2) + "\n";
  }

 private:
  std::map<TemplateId, PromptTemplate> templates_;
};

inline std::string render(const PromptTemplate& t, const std::string& body) {
  if (body.empty()) throw PromptError("render: empty body");
  size_t pos = t.text.find(kPlaceholder);
  if (pos == std::string::npos || placeholder_count(t.text) != 1)
    throw PromptError("template must contain exactly one {body} placeholder");
  std::string out = t.text;
  out.replace(pos, kPlaceholder.size(), body);
  return out;
}

inline TemplateId length_variant(LengthVariant kind) {
  switch (kind) {
    case LengthVariant::Long: return TemplateId::SummarizeLong;
    case LengthVariant::Medium: return TemplateId::SummarizeMedium;
    case LengthVariant::Short: return TemplateId::SummarizeShort;
  }
  return TemplateId::SummarizeMedium;
}

}  // namespace minutes::prompting

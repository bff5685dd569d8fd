#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "minutes/provider.hpp"

namespace minutes::provider {

// Generic chat-completion client. One user message per request; responses are
// parsed from the common {choices:[{message:{content}}], usage:{...}} shape.
// Token counts fall back to the chars/4 estimate when the backend omits usage.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.model.empty()) cfg_.model = cfg_.name;
  }

  const std::string& name() const override { return cfg_.name; }

  CompletionOutcome complete(const std::string& prompt) override {
    if (prompt.empty()) throw ProviderError("empty prompt", 1, Duration{0.0});
    std::string auth;
    if (!cfg_.auth_env.empty()) {
      const char* secret = std::getenv(cfg_.auth_env.c_str());
      if (!secret)
        throw ProviderError("auth secret missing: environment variable " +
                                cfg_.auth_env + " is unset",
                            1, Duration{0.0});
      auth = secret;
    }
    auto url = detail::parse_url(cfg_.endpoint);
    nlohmann::json body = {
        {"model", cfg_.model},
        {"messages",
         nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", cfg_.decoding.temperature},
        {"max_tokens", cfg_.decoding.max_output_tokens},
    };
    std::string payload = body.dump();

    return with_retry(cfg_.retry, [&]() -> detail::AttemptResult {
      httplib::Client client(url.base);
      auto timeout =
          std::chrono::duration_cast<std::chrono::milliseconds>(cfg_.request_timeout);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      httplib::Headers headers;
      if (!auth.empty()) headers.emplace("Authorization", "Bearer " + auth);

      auto res = client.Post(url.path, headers, payload, "application/json");
      detail::AttemptResult r;
      if (!res) {
        r.transient = true;  // network-level failure
        r.error = "request to " + cfg_.endpoint + " failed: " +
                  httplib::to_string(res.error());
        return r;
      }
      if (res->status == 429 || res->status >= 500) {
        r.transient = true;
        r.error = cfg_.name + " returned HTTP " + std::to_string(res->status);
        return r;
      }
      if (res->status != 200) {
        r.error = cfg_.name + " returned HTTP " + std::to_string(res->status) +
                  ": " + res->body;
        return r;
      }
      try {
        nlohmann::json j = nlohmann::json::parse(res->body);
        r.outcome.text = j.at("choices").at(0).at("message").at("content")
                             .get<std::string>();
        if (j.contains("usage")) {
          const auto& usage = j["usage"];
          r.outcome.input_tokens = usage.value("prompt_tokens", int64_t{0});
          r.outcome.output_tokens = usage.value("completion_tokens", int64_t{0});
        }
      } catch (const nlohmann::json::exception& e) {
        r.error = cfg_.name + " returned an unparseable response: " + e.what();
        return r;
      }
      if (r.outcome.input_tokens == 0)
        r.outcome.input_tokens = costing::estimate_tokens_from_chars(
            static_cast<int64_t>(prompt.size()));
      if (r.outcome.output_tokens == 0)
        r.outcome.output_tokens = costing::estimate_tokens_from_chars(
            static_cast<int64_t>(r.outcome.text.size()));
      r.ok = true;
      return r;
    });
  }

 private:
  ProviderConfig cfg_;
};

}  // namespace minutes::provider

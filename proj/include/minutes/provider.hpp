#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "minutes/costing.hpp"
#include "minutes/text.hpp"

namespace minutes::provider {

using Duration = std::chrono::duration<double>;  // seconds

struct RetryPolicy {
  int max_attempts = 3;
  Duration backoff_base{0.5};
  double backoff_multiplier = 2.0;
};

struct DecodingConfig {
  double temperature = 0.0;  // deterministic by default
  int max_output_tokens = 512;
};

struct ProviderConfig {
  std::string name;
  std::string endpoint;
  std::string auth_env;  // environment variable holding the secret
  std::string model;     // backend model identifier; defaults to name
  int max_input_tokens = 4096;
  Duration request_timeout{30.0};
  RetryPolicy retry;
  DecodingConfig decoding;
};

struct CompletionOutcome {
  std::string text;
  int64_t input_tokens = 0;
  int64_t output_tokens = 0;
  Duration latency{0.0};               // full attempt sequence, retries included
  Duration final_attempt_latency{0.0}; // the successful attempt alone
  int attempts = 1;
  int failed_attempts = 0;
};

class ProviderError : public std::runtime_error {
 public:
  ProviderError(const std::string& msg, int attempts, Duration elapsed)
      : std::runtime_error(msg), attempts(attempts), elapsed(elapsed) {}
  int attempts = 0;
  Duration elapsed{0.0};
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual const std::string& name() const = 0;
  virtual CompletionOutcome complete(const std::string& prompt) = 0;
};

struct MockParams {
  size_t summary_words = 50;        // k: words extracted from the prompt body
  Duration call_latency{0.0};       // simulated per-attempt latency (not slept)
  int fail_first_attempts = 0;      // transient failures before each success
  int max_attempts = 3;
};

// Deterministic offline backend: extracts the first k words of the prompt
// body (the text after the template's instruction separator) and accounts
// tokens with the chars/4 rule. Simulated latency and failures are bookkept,
// never slept, so large benchmark runs stay fast.
class MockProvider : public Provider {
 public:
  explicit MockProvider(MockParams params = {}, std::string name = "mock")
      : params_(params), name_(std::move(name)) {}

  const std::string& name() const override { return name_; }

  static std::string extract_body(const std::string& prompt) {
    // The instruction ends at the template's colon, or at its first sentence
    // boundary for the colon-free length-variant templates.
    size_t pos = prompt.find(": ");
    if (pos == std::string::npos) pos = prompt.find(". ");
    if (pos == std::string::npos) return prompt;
    return prompt.substr(pos + 2);
  }

  CompletionOutcome complete(const std::string& prompt) override {
    if (prompt.empty())
      throw ProviderError("mock: empty prompt", 1, Duration{0.0});
    int failures = params_.fail_first_attempts;
    if (failures >= params_.max_attempts)
      throw ProviderError("mock: scripted failure, retries exhausted",
                          params_.max_attempts,
                          params_.call_latency * params_.max_attempts);
    CompletionOutcome out = mock_complete(prompt, params_);
    out.attempts = failures + 1;
    out.failed_attempts = failures;
    out.final_attempt_latency = params_.call_latency;
    out.latency = params_.call_latency * out.attempts;
    return out;
  }

  static CompletionOutcome mock_complete(const std::string& prompt,
                                         const MockParams& params) {
    std::string body = extract_body(prompt);
    auto words = text::split_words(body);
    if (words.size() > params.summary_words) words.resize(params.summary_words);
    CompletionOutcome out;
    out.text = text::join_words(words);
    out.input_tokens = costing::estimate_tokens_from_chars(
        static_cast<int64_t>(prompt.size()));
    out.output_tokens = costing::estimate_tokens_from_chars(
        static_cast<int64_t>(out.text.size()));
    out.latency = params.call_latency;
    out.final_attempt_latency = params.call_latency;
    return out;
  }

  MockParams& params() { return params_; }

 private:
  MockParams params_;
  std::string name_;
};

namespace detail {

struct ParsedUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

inline ParsedUrl parse_url(const std::string& url) {
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ProviderError("invalid endpoint URL: " + url, 1, Duration{0.0});
  size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

struct AttemptResult {
  bool ok = false;
  bool transient = false;  // retryable when false attempt
  std::string error;
  CompletionOutcome outcome;
};

}  // namespace detail

// Retry loop shared by networked backends: exponential backoff on transient
// failures, terminal errors and exhaustion surface as ProviderError.
template <typename AttemptFn>
CompletionOutcome with_retry(const RetryPolicy& policy, AttemptFn&& attempt) {
  auto start = std::chrono::steady_clock::now();
  Duration backoff = policy.backoff_base;
  std::string last_error;
  for (int n = 1; n <= policy.max_attempts; ++n) {
    auto attempt_start = std::chrono::steady_clock::now();
    detail::AttemptResult r = attempt();
    auto attempt_end = std::chrono::steady_clock::now();
    if (r.ok) {
      r.outcome.attempts = n;
      r.outcome.failed_attempts = n - 1;
      r.outcome.final_attempt_latency = attempt_end - attempt_start;
      r.outcome.latency = attempt_end - start;
      return r.outcome;
    }
    last_error = r.error;
    if (!r.transient || n == policy.max_attempts) {
      throw ProviderError(last_error, n,
                          Duration(std::chrono::steady_clock::now() - start));
    }
    std::this_thread::sleep_for(backoff);
    backoff *= policy.backoff_multiplier;
  }
  throw ProviderError(last_error, policy.max_attempts,
                      Duration(std::chrono::steady_clock::now() - start));
}

}  // namespace minutes::provider

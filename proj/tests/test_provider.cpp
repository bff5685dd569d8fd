#include <catch2/catch_amalgamated.hpp>

#include "minutes/provider.hpp"

using namespace minutes;
using provider::MockParams;
using provider::MockProvider;

TEST_CASE("mock extracts the first k words after the template colon") {
  MockParams p;
  p.summary_words = 2;
  auto out = MockProvider::mock_complete("Summarize the following conversation: a b c d", p);
  CHECK(out.text == "a b");
}

TEST_CASE("mock clamps k to the body length") {
  MockParams p;
  p.summary_words = 50;
  auto out = MockProvider::mock_complete("Summarize the following text: x y z", p);
  CHECK(out.text == "x y z");
}

TEST_CASE("mock handles the colon-free length-variant templates") {
  MockParams p;
  p.summary_words = 3;
  auto out = MockProvider::mock_complete(
      "Generate a summary of the following conversation. a b c d e", p);
  CHECK(out.text == "a b c");
}

TEST_CASE("mock is deterministic and counts tokens by chars/4") {
  std::string prompt = "Summarize the following conversation: hello world again";
  MockProvider backend;
  auto a = backend.complete(prompt);
  auto b = backend.complete(prompt);
  CHECK(a.text == b.text);
  CHECK(a.input_tokens == b.input_tokens);
  CHECK(a.input_tokens ==
        costing::estimate_tokens_from_chars(static_cast<int64_t>(prompt.size())));
  CHECK(a.output_tokens ==
        costing::estimate_tokens_from_chars(static_cast<int64_t>(a.text.size())));
  CHECK(a.attempts == 1);
  CHECK(a.failed_attempts == 0);
}

TEST_CASE("scripted failures: fail twice then succeed") {
  MockParams p;
  p.fail_first_attempts = 2;
  p.max_attempts = 3;
  MockProvider backend(p);
  auto out = backend.complete("Summarize the following conversation: a b");
  CHECK(out.attempts == 3);
  CHECK(out.failed_attempts == 2);
  CHECK(out.attempts == out.failed_attempts + 1);
}

TEST_CASE("exhausted retries surface as a terminal failure with attempt count") {
  MockParams p;
  p.fail_first_attempts = 3;
  p.max_attempts = 3;
  MockProvider backend(p);
  try {
    backend.complete("Summarize the following conversation: a");
    FAIL("expected ProviderError");
  } catch (const provider::ProviderError& e) {
    CHECK(e.attempts == 3);
  }
}

TEST_CASE("latency grows with retry attempts under scripted delays") {
  auto latency_with_failures = [](int failures) {
    MockParams p;
    p.call_latency = provider::Duration(2.5);
    p.fail_first_attempts = failures;
    p.max_attempts = 5;
    MockProvider backend(p);
    return backend.complete("Summarize the following conversation: a b c").latency;
  };
  auto l0 = latency_with_failures(0);
  auto l1 = latency_with_failures(1);
  auto l2 = latency_with_failures(2);
  CHECK(l0.count() == Catch::Approx(2.5));
  CHECK(l1.count() > l0.count());
  CHECK(l2.count() > l1.count());
}

TEST_CASE("with_retry classifies terminal vs transient failures") {
  provider::RetryPolicy policy;
  policy.max_attempts = 4;
  policy.backoff_base = provider::Duration(0.0);

  int calls = 0;
  auto flaky = [&]() {
    provider::detail::AttemptResult r;
    if (++calls < 3) {
      r.transient = true;
      r.error = "temporarily unavailable";
      return r;
    }
    r.ok = true;
    r.outcome.text = "done";
    return r;
  };
  auto out = provider::with_retry(policy, flaky);
  CHECK(out.text == "done");
  CHECK(out.attempts == 3);
  CHECK(out.failed_attempts == 2);

  calls = 0;
  auto fatal = [&]() {
    provider::detail::AttemptResult r;
    ++calls;
    r.error = "bad credentials";
    return r;  // terminal: no retry
  };
  CHECK_THROWS_AS(provider::with_retry(policy, fatal), provider::ProviderError);
  CHECK(calls == 1);
}

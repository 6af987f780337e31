#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "mirage/provider/http_provider.hpp"
#include "mirage/provider/scripted.hpp"
#include "mirage/provider/structured.hpp"

using namespace mirage::provider;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

std::string ok_body(const std::string& text) {
  return json{{"model", "served-model"}, {"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}}
      .dump();
}

ProviderConfig http_cfg() {
  ::setenv("MIRAGE_TEST_KEY", "secret-token", 1);
  ProviderConfig cfg;
  cfg.model_name = "m";
  cfg.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  cfg.credential_env = "MIRAGE_TEST_KEY";
  cfg.retry_limit = 3;
  return cfg;
}

}  // namespace

TEST(Structured, ExtractsFromProseAndFences) {
  const auto j = extract_structured("Sure!\n```json\n{\"a\": 1, \"b\": \"}\"}\n```\nDone.", {"a"});
  EXPECT_EQ(j["a"], 1);
  EXPECT_EQ(j["b"], "}");
}

TEST(Structured, SkipsUnparseableObjectsAndReportsErrors) {
  EXPECT_EQ(extract_structured("{not json} then {\"k\": true}", {"k"})["k"], true);
  EXPECT_THROW(extract_structured("no braces here"), NoPayload);
  EXPECT_THROW(extract_structured("{\"a\": 1}", {"b"}), MissingKey);
  EXPECT_THROW(extract_structured("{oops: }"), ParseError);
  EXPECT_FALSE(try_extract_structured("{\"a\": 1}", {"b"}).has_value());
}

TEST(Structured, BalancedObjectRespectsStringEscapes) {
  const std::string text = R"(x {"s": "a \"}\" b", "n": {"m": 1}} y)";
  const auto r = find_balanced_object(text);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(text.substr(r->first, r->second - r->first), R"({"s": "a \"}\" b", "n": {"m": 1}})");
  EXPECT_FALSE(find_balanced_object("{ unclosed").has_value());
}

TEST(Structured, YesNo) {
  EXPECT_EQ(parse_yes_no("Y"), true);
  EXPECT_EQ(parse_yes_no("no"), false);
  EXPECT_EQ(parse_yes_no(true), true);
  EXPECT_FALSE(parse_yes_no("maybe").has_value());
  EXPECT_FALSE(parse_yes_no(3).has_value());
}

TEST(Scripted, FirstMatchingRuleWinsAndMissThrows) {
  auto p = std::make_shared<ScriptedProvider>();
  p->register_script(contains(std::vector<std::string>{"alpha", "beta"}), "both");
  p->register_script(contains("alpha"), "alpha only");
  p->register_script(matches_regex("^id-[0-9]+$"), [](std::string_view s) { return "echo " + std::string(s); });
  LlmClient c(p, ProviderConfig{});
  EXPECT_EQ(c.complete("alpha beta").text, "both");
  EXPECT_EQ(c.complete("alpha").text, "alpha only");
  EXPECT_EQ(c.complete("id-42").text, "echo id-42");
  EXPECT_THROW(c.complete("gamma"), ScriptMiss);
  EXPECT_EQ(p->call_count(), 4u);
}

TEST(Scripted, SequenceRepeatsLastAndUnregister) {
  auto p = std::make_shared<ScriptedProvider>();
  const auto h = p->register_sequence(any_prompt(), {"one", "two"});
  p->register_script(any_prompt(), "fallback");
  ProviderConfig cfg;
  EXPECT_EQ(p->complete("x", cfg).text, "one");
  EXPECT_EQ(p->complete("x", cfg).text, "two");
  EXPECT_EQ(p->complete("x", cfg).text, "two");
  p->unregister(h);
  EXPECT_EQ(p->complete("x", cfg).text, "fallback");
}

TEST(Scripted, FromJsonRules) {
  auto p = ScriptedProvider::from_json(json::parse(R"([
    {"contains": ["red", "blue"], "response": "purple"},
    {"regex": "gr[ae]y", "responses": ["g1", "g2"]},
    {"response": "default"}
  ])"));
  ProviderConfig cfg;
  EXPECT_EQ(p->complete("red and blue", cfg).text, "purple");
  EXPECT_EQ(p->complete("grey", cfg).text, "g1");
  EXPECT_EQ(p->complete("gray", cfg).text, "g2");
  EXPECT_EQ(p->complete("other", cfg).text, "default");
}

TEST(Recording, KeepsPromptsAndConfig) {
  auto inner = std::make_shared<ScriptedProvider>();
  inner->register_script(any_prompt(), "r");
  auto rec = std::make_shared<RecordingProvider>(inner);
  ProviderConfig cfg;
  cfg.model_name = "judge";
  LlmClient(rec, cfg).complete("hello");
  ASSERT_EQ(rec->calls().size(), 1u);
  EXPECT_EQ(rec->calls()[0].prompt, "hello");
  EXPECT_EQ(rec->calls()[0].cfg.model_name, "judge");
}

TEST(Config, FromJsonKeepsDefaults) {
  const auto cfg = provider_config_from_json(json{{"model_name", "x"}, {"timeout_s", 5}});
  EXPECT_EQ(cfg.model_name, "x");
  EXPECT_EQ(cfg.timeout, 5000ms);
  EXPECT_EQ(cfg.credential_env, "WORKBENCH_API_KEY");
  EXPECT_EQ(cfg.retry_limit, 3);
}

TEST(Http, BackoffBounds) {
  for (int attempt = 0; attempt < 5; ++attempt) {
    const double base = 500.0 * (1 << attempt);
    EXPECT_NEAR(static_cast<double>(backoff_delay(attempt, 0.0).count()), base * 0.8, 1.0);
    EXPECT_NEAR(static_cast<double>(backoff_delay(attempt, 1.0).count()), base * 1.2, 1.0);
    EXPECT_NEAR(static_cast<double>(backoff_delay(attempt, 0.5).count()), base, 1.0);
  }
}

TEST(Http, RequestAndResponseShape) {
  ProviderConfig cfg;
  cfg.model_name = "m1";
  cfg.temperature = 0.25;
  cfg.max_tokens = 64;
  const auto req = build_chat_request("hi", cfg);
  EXPECT_EQ(req["model"], "m1");
  EXPECT_EQ(req["messages"][0]["content"], "hi");
  EXPECT_EQ(req["max_tokens"], 64);
  EXPECT_EQ(parse_chat_response(json::parse(ok_body("text"))), "text");
  EXPECT_THROW(parse_chat_response(json{{"choices", json::array()}}), ProviderRefusal);
}

TEST(Http, RetriesServerErrorsThenSucceeds) {
  std::vector<int> statuses = {503, 429, 200};
  std::atomic<int> calls{0};
  std::vector<std::chrono::milliseconds> sleeps;
  std::string seen_bearer;
  HttpProvider p(
      2,
      [&](const std::string&, const std::string&, const std::string& bearer, std::chrono::milliseconds) {
        seen_bearer = bearer;
        const int s = statuses[static_cast<std::size_t>(calls++)];
        return HttpResult{s, s == 200 ? ok_body("fine") : "busy", {}};
      },
      [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  const auto c = p.complete("q", http_cfg());
  EXPECT_EQ(c.text, "fine");
  EXPECT_EQ(c.attempt_count, 3);
  EXPECT_EQ(c.model_name, "served-model");
  EXPECT_EQ(seen_bearer, "secret-token");
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_GE(sleeps[0].count(), 400);
  EXPECT_LE(sleeps[0].count(), 600);
  EXPECT_GE(sleeps[1].count(), 800);
  EXPECT_LE(sleeps[1].count(), 1200);
}

TEST(Http, TransportFailureExhaustsRetries) {
  int calls = 0;
  HttpProvider p(
      1,
      [&](const std::string&, const std::string&, const std::string&, std::chrono::milliseconds) {
        ++calls;
        return HttpResult{0, {}, "connection refused"};
      },
      [](std::chrono::milliseconds) {});
  try {
    p.complete("q", http_cfg());
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.attempts(), 4);
  }
  EXPECT_EQ(calls, 4);
}

TEST(Http, AuthAndRefusalAreNotRetried) {
  for (const auto& [status, is_auth] : std::vector<std::pair<int, bool>>{{401, true}, {403, true}, {400, false}}) {
    int calls = 0;
    HttpProvider p(
        1,
        [&, s = status](const std::string&, const std::string&, const std::string&, std::chrono::milliseconds) {
          ++calls;
          return HttpResult{s, "{}", {}};
        },
        [](std::chrono::milliseconds) {});
    if (is_auth) {
      EXPECT_THROW(p.complete("q", http_cfg()), AuthError);
    } else {
      EXPECT_THROW(p.complete("q", http_cfg()), ProviderRefusal);
    }
    EXPECT_EQ(calls, 1);
  }
}

TEST(Http, MissingCredentialFailsBeforeAnyRequest) {
  int calls = 0;
  HttpProvider p(1, [&](const std::string&, const std::string&, const std::string&, std::chrono::milliseconds) {
    ++calls;
    return HttpResult{200, ok_body("x"), {}};
  });
  auto cfg = http_cfg();
  cfg.credential_env = "MIRAGE_TEST_KEY_UNSET";
  ::unsetenv("MIRAGE_TEST_KEY_UNSET");
  EXPECT_THROW(p.complete("q", cfg), AuthError);
  EXPECT_EQ(calls, 0);
}

TEST(Http, InFlightLimitHolds) {
  std::atomic<int> active{0}, peak{0};
  auto p = std::make_shared<HttpProvider>(
      2, [&](const std::string&, const std::string&, const std::string&, std::chrono::milliseconds) {
        const int now = ++active;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(5ms);
        --active;
        return HttpResult{200, ok_body("x"), {}};
      });
  const auto cfg = http_cfg();
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { p->complete("q", cfg); });
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 2);
  EXPECT_GE(peak.load(), 1);
}

TEST(Http, WireRoundTripAgainstLocalServer) {
  httplib::Server server;
  std::string auth_header, request_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    auth_header = req.get_header_value("Authorization");
    request_body = req.body;
    res.set_content(ok_body("from server"), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto cfg = http_cfg();
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  HttpProvider p(1);
  const auto c = p.complete("wire prompt", cfg);
  server.stop();
  t.join();

  EXPECT_EQ(c.text, "from server");
  EXPECT_EQ(auth_header, "Bearer secret-token");
  EXPECT_EQ(json::parse(request_body)["messages"][0]["content"], "wire prompt");
}

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "local_server.hpp"
#include "nsplan/errors.hpp"
#include "nsplan/generator.hpp"
#include "nsplan/text.hpp"
#include "support.hpp"

using namespace nsplan;
using nsplan::testing::LocalServer;

namespace {

GenerationRequest request(std::vector<std::string> history, std::vector<std::string> knowledge) {
  GenerationRequest r;
  r.prompt = "Task: x\nStep 1:";
  r.history = std::move(history);
  r.knowledge = std::move(knowledge);
  return r;
}

HttpOptions fast_http(const std::string& url) {
  HttpOptions o;
  o.url = url;
  o.retry.max_retries = 1;
  o.retry.base_delay = std::chrono::milliseconds(1);
  o.retry.max_delay = std::chrono::milliseconds(1);
  o.timeout = std::chrono::seconds(5);
  return o;
}

}  // namespace

TEST(FirstStep, CutsToOneStep) {
  EXPECT_EQ(first_step_text(" Walk to television.\nStep 2: Switch on television."), "Walk to television");
  EXPECT_EQ(first_step_text("Step 2: Switch on television. Then sit down."), "Switch on television");
  EXPECT_EQ(first_step_text("grab cup Step 3: drink"), "grab cup");
  EXPECT_EQ(first_step_text("   \n"), "");
  EXPECT_EQ(first_step_text("open door..."), "open door");
}

TEST(Logprobs, GeometricMeanProbability) {
  auto c = confidence_from_logprobs({std::log(0.5), std::log(0.125)});
  ASSERT_TRUE(c);
  EXPECT_NEAR(*c, 0.25, 1e-12);
  EXPECT_FALSE(confidence_from_logprobs({}));
  EXPECT_FALSE(confidence_from_logprobs({-INFINITY, NAN}));
}

TEST(Request, AutoencoderModeAppendsMask) {
  auto r = request({}, {});
  EXPECT_EQ(r.shaped_prompt(), r.prompt);
  r.mode = GenerationMode::kAutoencoder;
  EXPECT_EQ(r.shaped_prompt(), r.prompt + " [MASK]");
}

TEST(Follower, ReplaysUnusedKnowledgeWithSchedule) {
  KnowledgeFollower f({1.0, 0.9, 0.5});
  std::vector<std::string> k{"a", "b", "c", "d"};
  auto r0 = f.next_step(request({}, k));
  EXPECT_EQ(r0.text, "a");
  EXPECT_DOUBLE_EQ(r0.confidence, 1.0);
  auto r1 = f.next_step(request({"a"}, k));
  EXPECT_EQ(r1.text, "b");
  EXPECT_DOUBLE_EQ(r1.confidence, 0.9);
  auto r3 = f.next_step(request({"a", "b", "c"}, k));
  EXPECT_EQ(r3.text, "d");
  EXPECT_DOUBLE_EQ(r3.confidence, 0.5);  // last entry repeats
  auto done = f.next_step(request({"a", "b", "c", "d"}, k));
  EXPECT_EQ(done.text, "");
  EXPECT_DOUBLE_EQ(done.confidence, 0.0);
  EXPECT_DOUBLE_EQ(KnowledgeFollower().next_step(request({}, {"z"})).confidence, 1.0);
}

TEST(Scripted, KeyedByFingerprint) {
  auto g = ScriptedGenerator::load(nsplan::testing::fixture("watch_tv_scripted.json"));
  GenerationRequest r;
  r.prompt = "Task: Watch TV\nStep 1:";
  auto out = g.next_step(r);
  EXPECT_EQ(out.text, "Walk to television");
  EXPECT_DOUBLE_EQ(out.confidence, 0.9);
  r.prompt = "Task: Watch TV\nStep 9:";
  try {
    g.next_step(r);
    FAIL();
  } catch (const FixtureMissError& e) {
    EXPECT_EQ(e.fingerprint(), fingerprint_hex(r.prompt));
  }
  std::istringstream bad(R"({"abc": 3})");
  EXPECT_THROW(ScriptedGenerator::parse_json(bad), Error);
}

TEST(Remote, SendsCompletionRequestAndReadsLogprobs) {
  nlohmann::json seen;
  std::string auth;
  LocalServer server([&](httplib::Server& s) {
    s.Post("/v1/completions", [&](const httplib::Request& req, httplib::Response& res) {
      seen = nlohmann::json::parse(req.body);
      auth = req.get_header_value("Authorization");
      nlohmann::json body{{"choices",
                           {{{"text", " walk to sofa.\nStep 2: sit"},
                             {"logprobs", {{"token_logprobs", {std::log(0.64), std::log(1.0), nullptr}}}}}}}};
      res.set_content(body.dump(), "application/json");
    });
  });
  auto http = fast_http(server.url("/v1/completions"));
  http.api_key = "k";
  RemoteGenerator g({http, "tiny", 1});
  auto r = request({}, {});
  r.mode = GenerationMode::kAutoencoder;
  auto out = g.next_step(r);
  EXPECT_EQ(out.text, "walk to sofa");
  EXPECT_NEAR(out.confidence, 0.8, 1e-12);
  EXPECT_FALSE(out.confidence_defaulted);
  EXPECT_EQ(seen["model"], "tiny");
  EXPECT_EQ(seen["prompt"], "Task: x\nStep 1: [MASK]");
  EXPECT_EQ(seen["temperature"], 0.0);
  EXPECT_EQ(seen["logprobs"], 1);
  EXPECT_EQ(seen["stop"], nlohmann::json::array({"\n"}));
  EXPECT_EQ(auth, "Bearer k");
  EXPECT_EQ(seen, g.request_body(r));
}

TEST(Remote, MissingLogprobsDefaultsConfidence) {
  LocalServer server([&](httplib::Server& s) {
    s.Post("/c", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"choices": [{"text": "open fridge"}]})", "application/json");
    });
    s.Post("/empty", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"choices": []})", "application/json");
    });
    s.Post("/down", [&](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  });
  auto out = RemoteGenerator({fast_http(server.url("/c")), "m", 1}).next_step(request({}, {}));
  EXPECT_EQ(out.text, "open fridge");
  EXPECT_DOUBLE_EQ(out.confidence, 1.0);
  EXPECT_TRUE(out.confidence_defaulted);
  EXPECT_THROW(RemoteGenerator({fast_http(server.url("/empty")), "m", 1}).next_step(request({}, {})), TransportError);
  try {
    RemoteGenerator({fast_http(server.url("/down")), "m", 1}).next_step(request({}, {}));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 500);
  }
}

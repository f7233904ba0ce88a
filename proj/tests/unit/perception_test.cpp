#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "etho/error.hpp"
#include "etho/perception/client.hpp"
#include "etho/perception/live.hpp"
#include "etho/perception/oracle.hpp"
#include "etho/perception/render.hpp"
#include "etho/perception/schemas.hpp"
#include "etho/util/text.hpp"

namespace {

using namespace etho;
using namespace etho::perception;
using nlohmann::json;
namespace fs = std::filesystem;

const json kAssignCtx = {{"keypoints", {"ear_L", "ear_R"}}, {"candidates", {0, 2, 5}}};

TEST(ExtractJson, ToleratesFencesAndProse) {
  EXPECT_EQ(*extract_json("Sure! ```json\n{\"a\": 1}\n``` hope that helps"), json({{"a", 1}}));
  EXPECT_FALSE(extract_json("no braces here"));
  EXPECT_FALSE(extract_json("{broken"));
}

TEST(Schema, Box) {
  EXPECT_FALSE(validate_payload(kRegionBoxSchema, {{"box", {0, 0, 10, 10}}}, {}));
  EXPECT_TRUE(validate_payload(kRegionBoxSchema, {{"box", {0, 0, 10}}}, {}));
  EXPECT_TRUE(validate_payload(kRegionBoxSchema, {{"box", {10, 0, 5, 10}}}, {}));
  EXPECT_TRUE(validate_payload(kRegionBoxSchema, {{"box", {0, 0, "1", 10}}}, {}));
}

TEST(Schema, Assignment) {
  EXPECT_FALSE(validate_payload(kAssignSchema, {{"assignments", {{"ear_L", 0}, {"ear_R", nullptr}}}}, kAssignCtx));
  EXPECT_TRUE(validate_payload(kAssignSchema, {{"assignments", {{"ear_L", 0}}}}, kAssignCtx));
  EXPECT_TRUE(validate_payload(kAssignSchema, {{"assignments", {{"ear_L", 1}, {"ear_R", 2}}}}, kAssignCtx));
  EXPECT_TRUE(validate_payload(kAssignSchema, {{"assignments", {{"ear_L", 2}, {"ear_R", 2}}}}, kAssignCtx));
  EXPECT_TRUE(
      validate_payload(kAssignSchema, {{"assignments", {{"ear_L", 0}, {"ear_R", 2}, {"nose", 5}}}}, kAssignCtx));
}

TEST(Schema, Caption) {
  EXPECT_FALSE(validate_payload(kCaptionSchema, {{"label", "grooming"}, {"description", "licks paw"}}, {}));
  EXPECT_TRUE(validate_payload(kCaptionSchema, {{"label", "one two three four five six seven"},
                                                {"description", "x"}}, {}));
  EXPECT_TRUE(validate_payload(kCaptionSchema, {{"label", "  "}, {"description", "x"}}, {}));
  EXPECT_TRUE(validate_payload(kCaptionSchema, {{"label", "walk"}}, {}));
  EXPECT_EQ(count_words("  a  b\tc "), 3);
}

json merge_ctx(int n) {
  json clips = json::array();
  for (int i = 0; i < n; ++i) clips.push_back({{"id", 10 + i}});
  return {{"clips", clips}};
}

json merge_reply(const std::vector<std::vector<int>>& groups) {
  json segs = json::array();
  for (const auto& g : groups) segs.push_back({{"clips", g}, {"label", "x"}, {"description", "y"}});
  return {{"segments", segs}};
}

TEST(Schema, MergeStructure) {
  const auto ctx = merge_ctx(4);
  EXPECT_FALSE(validate_payload(kMergeSchema, merge_reply({{10, 11}, {12, 13}}), ctx));
  EXPECT_NE(validate_payload(kMergeSchema, merge_reply({{10, 11}, {11, 12, 13}}), ctx)->find("overlap"),
            std::string::npos);
  EXPECT_NE(validate_payload(kMergeSchema, merge_reply({{10, 11}, {13}}), ctx)->find("gap"), std::string::npos);
  EXPECT_NE(validate_payload(kMergeSchema, merge_reply({{10, 12}, {11, 13}}), ctx)->find("non-consecutive"),
            std::string::npos);
  EXPECT_NE(validate_payload(kMergeSchema, merge_reply({{12, 13}, {10, 11}}), ctx)->find("non-consecutive"),
            std::string::npos);
  EXPECT_TRUE(validate_payload(kMergeSchema, merge_reply({{10, 11, 12, 13, 99}}), ctx));
  EXPECT_TRUE(validate_payload(kMergeSchema, merge_reply({}), ctx));
}

PerceptionRequest assign_request(int retries) {
  PerceptionRequest r;
  r.task = Task::kRegionAssign;
  r.schema_id = kAssignSchema;
  r.max_retries = retries;
  r.context = kAssignCtx;
  r.prompt = "assign";
  r.attachments.push_back({});
  return r;
}

TEST(Client, RetriesUntilValid) {
  auto t = std::make_shared<ScriptedTransport>(std::vector<std::string>{
      "garbage", R"({"assignments": {"ear_L": 9, "ear_R": 0}})", R"({"assignments": {"ear_L": 5, "ear_R": 0}})"});
  PerceptionClient client(t);
  const auto resp = client.call(assign_request(2));
  EXPECT_EQ(resp.attempts, 3);
  EXPECT_EQ(resp.payload["assignments"]["ear_L"], 5);
  const auto seen = t->seen();
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_NE(seen[2].prompt.find("not a candidate"), std::string::npos);
  EXPECT_EQ(client.stats().attempts, 3);
}

TEST(Client, SchemaErrorAfterRetryBudget) {
  PerceptionClient client(std::make_shared<ScriptedTransport>(std::vector<std::string>{"{}"}));
  try {
    client.call(assign_request(1));
    FAIL();
  } catch (const ClientSchemaError& e) {
    EXPECT_EQ(e.attempts(), 2);
  }
  EXPECT_EQ(client.stats().schema_failures, 1);
}

TEST(Client, UnavailablePropagates) {
  PerceptionClient client(std::make_shared<UnavailableTransport>());
  EXPECT_THROW(client.call(assign_request(2)), ClientUnavailable);
  PerceptionClient scripted(std::make_shared<ScriptedTransport>(std::vector<std::string>{"!unavailable"}));
  EXPECT_THROW(scripted.call(assign_request(2)), ClientUnavailable);
}

TEST(Client, RejectsInvalidRequest) {
  PerceptionClient client(std::make_shared<ScriptedTransport>(std::vector<std::string>{"{}"}));
  auto r = assign_request(2);
  r.attachments.clear();
  EXPECT_THROW(client.call(r), ValidationError);
  r = assign_request(2);
  r.schema_id = "nope";
  EXPECT_THROW(client.call(r), ValidationError);
}

// --- oracle --------------------------------------------------------------------

std::shared_ptr<GroundTruth> small_truth() {
  auto t = std::make_shared<GroundTruth>();
  for (long long f = 0; f < 20; ++f) {
    t->pose.assignments[{f, "cam0"}] = {{"ear_L", 0}, {"ear_R", 1}, {"back_top", 2}, {"back_middle", 3}};
    t->pose.regions[{f, "cam0", "ears"}] = {10, 10, 50, 40};
  }
  return t;
}

PerceptionRequest oracle_assign(long long frame) {
  PerceptionRequest r = assign_request(0);
  r.context = {{"frame", frame}, {"view", "cam0"}, {"region", "ears"}, {"keypoints", {"ear_L", "ear_R"}},
               {"candidates", {0, 1}}};
  return r;
}

TEST(Oracle, AnswersFromTruth) {
  OracleTransport t(small_truth(), CorruptionSpec{});
  const auto reply = json::parse(t.complete(oracle_assign(3)));
  EXPECT_EQ(reply["assignments"]["ear_L"], 0);
  EXPECT_EQ(reply["assignments"]["ear_R"], 1);
  PerceptionRequest box;
  box.task = Task::kRegionDetect;
  box.context = {{"frame", 3}, {"view", "cam0"}, {"region", "ears"}};
  EXPECT_EQ(json::parse(t.complete(box))["box"], json({10, 10, 50, 40}));
}

TEST(Oracle, CorruptionIndependentOfCallOrder) {
  CorruptionSpec spec;
  spec.p_swap = 0.5;
  spec.seed = 4;
  OracleTransport forward(small_truth(), spec), backward(small_truth(), spec);
  std::vector<std::string> a(20), b(20);
  for (int f = 0; f < 20; ++f) a[f] = forward.complete(oracle_assign(f));
  for (int f = 19; f >= 0; --f) b[f] = backward.complete(oracle_assign(f));
  EXPECT_EQ(a, b);
  const auto swaps = forward.injected_swaps();
  EXPECT_GT(swaps.size(), 2u);
  EXPECT_LT(swaps.size(), 18u);
}

TEST(Oracle, MajoritySegmentPrefersEarliestOnTies) {
  const std::vector<PlantedSegment> planted{{0, 10, 0}, {10, 20, 1}, {20, 30, 2}};
  EXPECT_EQ(majority_segment(planted, 5, 15), 0u);
  EXPECT_EQ(majority_segment(planted, 8, 20), 1u);
  EXPECT_EQ(majority_segment(planted, 25, 30), 2u);
}

TEST(Oracle, CorruptionValidation) {
  CorruptionSpec s;
  s.p_swap = 1.5;
  EXPECT_THROW(OracleTransport(small_truth(), s), ConfigError);
  EXPECT_THROW(OracleTransport(nullptr, CorruptionSpec{}), ConfigError);
}

// --- live adapter ----------------------------------------------------------------

TEST(Live, DigestAndEncoding) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(base64_encode("hello"), "aGVsbG8=");
  EXPECT_EQ(base64_encode(""), "");
}

TEST(Live, ConfigParsing) {
  const auto c = parse_live_config({{"endpoint", "http://h:1/v1"}, {"model", "m"}, {"burst", 3}});
  EXPECT_EQ(c.burst, 3);
  EXPECT_THROW(parse_live_config({{"endpoint", "http://h"}, {"model", "m"}, {"colour", 1}}), ConfigError);
  EXPECT_THROW(parse_live_config({{"model", "m"}}), ConfigError);
  EXPECT_THROW(parse_live_config({{"cassette", {{"mode", "replay"}}}}), ConfigError);
  EXPECT_NO_THROW(parse_live_config({{"cassette", {{"mode", "replay"}, {"path", "x.jsonl"}}}}));
}

PerceptionRequest merge_request() {
  PerceptionRequest r;
  r.task = Task::kMerge;
  r.schema_id = kMergeSchema;
  r.prompt = "merge these";
  r.context = merge_ctx(2);
  return r;
}

TEST(Live, ChatBodyShape) {
  LiveConfig cfg;
  cfg.model = "vlm-x";
  const auto body = build_chat_body(merge_request(), cfg);
  EXPECT_EQ(body["model"], "vlm-x");
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"][0]["text"], "merge these");
}

class FakeEndpoint {
 public:
  FakeEndpoint() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++hits_;
      last_auth_ = req.get_header_value("Authorization");
      if (n <= fail_first_) {
        res.status = 503;
        return;
      }
      if (reject_) {
        res.status = 400;
        res.set_content("bad request", "text/plain");
        return;
      }
      const json envelope = {{"choices", {{{"message", {{"role", "assistant"}, {"content", reply_}}}}}}};
      res.set_content(envelope.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  int fail_first_ = 0;
  bool reject_ = false;
  std::string reply_ = R"({"segments": [{"clips": [10, 11], "label": "walking", "description": "walks"}]})";
  std::string last_auth_;
};

LiveConfig live_config(const std::string& endpoint) {
  LiveConfig c;
  c.endpoint = endpoint;
  c.model = "test-model";
  c.backoff_ms = 1;
  c.timeout_s = 5;
  return c;
}

TEST(Live, RoundTripThroughHttp) {
  FakeEndpoint server;
  ::setenv("ETHO_TEST_TOKEN", "sekret", 1);
  auto cfg = live_config(server.endpoint());
  cfg.auth_env = "ETHO_TEST_TOKEN";
  PerceptionClient client(std::make_shared<HttpTransport>(cfg));
  const auto resp = client.call(merge_request());
  EXPECT_EQ(resp.payload["segments"][0]["label"], "walking");
  EXPECT_EQ(server.last_auth_, "Bearer sekret");
}

TEST(Live, RetriesServerErrors) {
  FakeEndpoint server;
  server.fail_first_ = 2;
  HttpTransport t(live_config(server.endpoint()));
  EXPECT_NO_THROW(t.complete(merge_request()));
  EXPECT_EQ(server.hits_.load(), 3);
}

TEST(Live, ClientErrorIsUnavailable) {
  FakeEndpoint server;
  server.reject_ = true;
  HttpTransport t(live_config(server.endpoint()));
  EXPECT_THROW(t.complete(merge_request()), ClientUnavailable);
  EXPECT_EQ(server.hits_.load(), 1);
}

TEST(Live, UnreachableEndpointIsUnavailable) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  auto cfg = live_config("http://127.0.0.1:" + std::to_string(port) + "/v1");
  cfg.transport_retries = 1;
  HttpTransport t(cfg);
  EXPECT_THROW(t.complete(merge_request()), ClientUnavailable);
}

TEST(Live, CassetteRecordThenReplay) {
  const fs::path cassette = fs::temp_directory_path() / "etho_cassette_test.jsonl";
  fs::remove(cassette);
  std::string recorded;
  {
    FakeEndpoint server;
    auto cfg = live_config(server.endpoint());
    cfg.cassette_mode = LiveConfig::CassetteMode::kRecord;
    cfg.cassette_path = cassette;
    HttpTransport t(cfg);
    recorded = t.complete(merge_request());
    EXPECT_EQ(t.complete(merge_request()), recorded);
    EXPECT_EQ(server.hits_.load(), 1);
  }
  LiveConfig replay;
  replay.cassette_mode = LiveConfig::CassetteMode::kReplay;
  replay.cassette_path = cassette;
  replay.model = "test-model";
  HttpTransport t(replay);
  EXPECT_EQ(t.complete(merge_request()), recorded);
  auto other = merge_request();
  other.prompt = "different";
  EXPECT_THROW(t.complete(other), ClientUnavailable);
  fs::remove(cassette);
}

TEST(Render, PassesThroughPlainFiles) {
  const fs::path p = fs::temp_directory_path() / "etho_render_test.png";
  util::write_file(p, "not-really-a-png");
  Attachment a;
  a.path = p.string();
  const auto img = render_attachment(a);
  EXPECT_EQ(img.bytes, "not-really-a-png");
  EXPECT_EQ(img.mime, "image/png");
  fs::remove(p);
  EXPECT_THROW(render_attachment(a), IoError);
}

}  // namespace

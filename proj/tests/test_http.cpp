#include <gtest/gtest.h>

#include <sstream>

#include "http_support.hpp"

using namespace vstkit;
using namespace testing_support;

namespace {

std::string create(httplib::Client& c, std::uint64_t seed = 4) {
  set_clock(c, 0.0);
  return post_json(c, "/v1/sessions", {{"rng_seed", seed}}, 201).at("session_id");
}

}  // namespace

class Http : public ::testing::Test {
 protected:
  HttpHarness harness;
  httplib::Client c = harness.client();
};

TEST_F(Http, CreateReturns201AndLocation) {
  auto res = c.Post("/v1/sessions", "{}", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  const std::string id = Json::parse(res->body).at("session_id");
  EXPECT_EQ(res->get_header_value("Location"), "/v1/sessions/" + id);
  EXPECT_EQ(get_json(c, "/v1/sessions/" + id).at("state"), "running");
}

TEST_F(Http, InvalidConfigIs422) {
  auto res = c.Post("/v1/sessions", R"({"step_size": -0.05})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  const Json body = Json::parse(res->body);
  EXPECT_EQ(body.at("error"), "InvalidConfig");
  EXPECT_EQ(body.at("details")[0].at("field"), "step_size");

  res = c.Post("/v1/sessions", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST_F(Http, UnknownSessionIs404) {
  auto res = c.Get("/v1/sessions/missing");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  res = c.Get("/v1/sessions/missing/events");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  res = c.Post("/v1/sessions/missing/response", "", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(Http, ResponseOutcomes) {
  const std::string id = create(c);
  const std::string base = "/v1/sessions/" + id;
  next_wakeup(c);
  double onset = get_json(c, base).at("current_stimulus").at("onset_s");
  set_clock(c, onset + 0.3);
  Json r = post_json(c, base + "/response", Json::object());
  EXPECT_EQ(r.at("outcome"), "detected");
  EXPECT_EQ(r.at("trial_index"), 0);

  post_json(c, "/v1/test/clock", {{"advance", 0.2}});
  r = post_json(c, base + "/response", Json::object());
  EXPECT_EQ(r.at("outcome"), "false_positive");
  EXPECT_EQ(r.at("false_positive_count"), 1);

  next_wakeup(c);
  onset = get_json(c, base).at("current_stimulus").at("onset_s");
  set_clock(c, onset + 1.7);
  r = post_json(c, base + "/response", Json::object());
  EXPECT_EQ(r.at("outcome"), "late_response");
  EXPECT_EQ(r.at("false_positive_count"), 2);

  auto res = c.Get(base + "/result");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
}

TEST_F(Http, ClockCannotRewindWhileRunning) {
  create(c);
  post_json(c, "/v1/test/clock", {{"advance", 1.0}});
  auto res = c.Post("/v1/test/clock", R"({"now": 0.5})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
}

TEST_F(Http, AbortThenConflicts) {
  const std::string id = create(c);
  const std::string base = "/v1/sessions/" + id;
  post_json(c, base + "/abort", Json::object());
  EXPECT_EQ(get_json(c, base).at("state"), "aborted");
  auto res = c.Post(base + "/abort", "", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
  res = c.Get(base + "/result");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
}

TEST_F(Http, EventStreamAndReconnect) {
  const std::string id = create(c);
  const std::string base = "/v1/sessions/" + id;
  for (int i = 0; i < 3; ++i) {
    next_wakeup(c);
    const double onset = get_json(c, base).at("current_stimulus").at("onset_s");
    set_clock(c, onset + 0.4);
    post_json(c, base + "/response", Json::object());
  }
  auto first = read_sse(c, base + "/events", 3);
  ASSERT_EQ(first.size(), 3u);
  EXPECT_EQ(first[0].event, "StimulusOnset");
  EXPECT_EQ(first[0].data.at("trial_index"), 0);
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first[i].id, static_cast<long long>(i));

  // drop after seq 2 and reconnect: the gap arrives, nothing repeats
  auto rest = read_sse(c, base + "/events", 3, {{"Last-Event-Seq", "2"}});
  ASSERT_EQ(rest.size(), 3u);
  EXPECT_EQ(rest[0].id, 3);
  EXPECT_EQ(rest[2].id, 5);
  EXPECT_EQ(rest[2].event, "TrialResolved");

  auto by_query = read_sse(c, base + "/events?last_seq=4", 1);
  ASSERT_EQ(by_query.size(), 1u);
  EXPECT_EQ(by_query[0].id, 5);
}

TEST_F(Http, CompletedSessionReplaysTerminalEvent) {
  StaircaseConfig cfg;
  cfg.rng_seed = 12;
  const Json doc = drive_http(c, cfg, {{0.4, false}, {std::nullopt, false}});
  const std::string id = doc.at("session_id");
  const auto all = read_sse(c, "/v1/sessions/" + id + "/events", 1000);
  ASSERT_FALSE(all.empty());
  EXPECT_EQ(all.back().event, "SessionCompleted");
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].id, static_cast<long long>(i));
  const auto tail = read_sse(c, "/v1/sessions/" + id + "/events", 1000,
                             {{"Last-Event-Seq", std::to_string(all.back().id - 1)}});
  ASSERT_EQ(tail.size(), 1u);
  EXPECT_EQ(tail[0].event, "SessionCompleted");
  EXPECT_EQ(tail[0].data.at("result"), "/v1/sessions/" + id + "/result");
}

TEST_F(Http, ScriptedClientMatchesEngine) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const StaircaseConfig cfg = random_config(seed);
    const auto script = random_script(seed * 13 + 7);
    const SessionResult via_http = result_from_json(drive_http(c, cfg, script));
    const SessionResult engine = run_script(cfg, script);
    ASSERT_TRUE(via_http == engine) << seed << ::testing::PrintToString(diff(engine, via_http));
  }
}

TEST_F(Http, SpectrumUpload) {
  std::ostringstream csv;
  write_waveform_csv(csv, synthesize_corpus(Instrument::Phone, 1, 2).front());
  auto res = c.Post("/v1/analysis/spectrum?band=50,500&order=4&window=hann", csv.str(), "text/csv");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_NEAR(Json::parse(res->body).at("peak_frequency").get<double>(), 230.0, 1.0);

  res = c.Post("/v1/analysis/spectrum", "garbage", "text/csv");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  res = c.Post("/v1/analysis/spectrum?band=nope", csv.str(), "text/csv");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

#include <gtest/gtest.h>

#include <future>
#include <sstream>
#include <thread>

#include "cubelens/service.h"
#include "cubelens/synth.h"
#include "httplib.h"
#include "json.hpp"

namespace cubelens {
namespace {

using nlohmann::json;

std::string FixtureLog() {
  std::ostringstream out;
  WriteLog(out, Generate(PresetScenario("fixture", 1)).entries);
  return out.str();
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const std::string log = FixtureLog();
    // Communities: odd users in "odd", even users in "even".
    std::ostringstream comm;
    for (int u = 1; u <= 2000; ++u) comm << UserName(u) << ',' << (u % 2 ? "odd" : "even") << '\n';
    service_ = new Service(BuildDataset(ParseLogText(log)), ParseCommunities(comm.str()));
  }
  static void TearDownTestSuite() {
    delete service_;
    service_ = nullptr;
  }

  static json Get(const std::string& path, QueryParams params = {}, int expect = 200) {
    ServiceResponse r = service_->HandleQuery("GET", path, params);
    EXPECT_EQ(r.status, expect) << path << ": " << r.body;
    return json::parse(r.body);
  }

  static Service* service_;
};

Service* ServiceTest::service_ = nullptr;

TEST_F(ServiceTest, Schema) {
  json s = Get("/schema");
  EXPECT_TRUE(s.at("loaded").get<bool>());
  EXPECT_EQ(s.at("days").size(), 31u);
  EXPECT_EQ(s.at("cubes").at("interactions").at("dimensions").size(), 4u);
  EXPECT_EQ(s.at("communities").get<int>(), 2000);
}

TEST_F(ServiceTest, EventsOfFixture) {
  json e = Get("/events");
  ASSERT_EQ(e.at("events").size(), 3u);
  EXPECT_EQ(e.at("events")[0].at("label"), "2016-08-09 3h");
  EXPECT_EQ(e.at("events")[1].at("label"), "2016-08-16 23h - 2016-08-17 0h");
  EXPECT_EQ(e.at("events")[2].at("label"), "2016-08-24 19h-21h");
  EXPECT_EQ(e.at("events")[0].at("id"), 0);
}

TEST_F(ServiceTest, AuthorAndSpreaderDrilldown) {
  json a = Get("/events/2/authors");
  EXPECT_EQ(a.at("cause").at("kind"), "one-main");
  EXPECT_EQ(a.at("cause").at("main_entities")[0].at("entity"), UserName(1));
  json s = Get("/events/2/spreaders");
  EXPECT_EQ(s.at("regime").at("kind"), "activist-group");
  json single = Get("/events/0/spreaders", {{"author", UserName(3)}});
  EXPECT_EQ(single.at("regime").at("kind"), "single-activist");
  Get("/events/0/spreaders", {{"author", "nobody"}}, 404);
}

TEST_F(ServiceTest, Hashtags) {
  json h = Get("/events/2/hashtags");
  ASSERT_FALSE(h.at("hashtags").empty());
  EXPECT_EQ(h.at("hashtags")[0].at("entity"), "rally");
  json g = Get("/hashtags");
  EXPECT_FALSE(g.at("triplets").empty());
}

TEST_F(ServiceTest, Evaluate) {
  ServiceResponse r = service_->HandleQuery("POST", "/evaluate", {},
                                            R"({"dims":["day","hour"],"preset":"multiagg","limit":5})");
  ASSERT_EQ(r.status, 200) << r.body;
  json j = json::parse(r.body);
  EXPECT_EQ(j.at("cell_count"), 31 * 24);
  EXPECT_EQ(j.at("cells").at("items").size(), 5u);
  EXPECT_EQ(j.at("cells").at("total"), 31 * 24);

  ServiceResponse spec = service_->HandleQuery(
      "POST", "/evaluate", {}, R"j({"spec":"cube(day)*cube(hour)/cube()","limit":5})j");
  ASSERT_EQ(spec.status, 200) << spec.body;
  json js = json::parse(spec.body);
  EXPECT_EQ(js.at("outliers"), j.at("outliers"));
  EXPECT_EQ(js.at("stats"), j.at("stats"));
}

TEST_F(ServiceTest, ErrorCodes) {
  EXPECT_EQ(service_->HandleQuery("POST", "/evaluate", {}, "{bad").status, 400);
  EXPECT_EQ(service_->HandleQuery("POST", "/evaluate", {}, R"j({"spec":"cube(nope)"})j").status, 400);
  EXPECT_EQ(service_->HandleQuery("POST", "/evaluate", {}, R"j({"spec":"cube()","preset":"basic"})j").status, 400);
  EXPECT_EQ(service_->HandleQuery("GET", "/evaluate", {}).status, 405);
  EXPECT_EQ(service_->HandleQuery("POST", "/events", {}).status, 405);
  EXPECT_EQ(service_->HandleQuery("GET", "/events/99/authors", {}).status, 404);
  EXPECT_EQ(service_->HandleQuery("GET", "/events/x/authors", {}).status, 404);
  EXPECT_EQ(service_->HandleQuery("GET", "/nothing", {}).status, 404);
  EXPECT_EQ(service_->HandleQuery("GET", "/events", {{"sigma", "-1"}}).status, 400);
  EXPECT_EQ(service_->HandleQuery("GET", "/topics", {}).status, 400);
  EXPECT_EQ(service_->HandleQuery("GET", "/predict", {{"s", UserName(1)}}).status, 400);
  json err = json::parse(service_->HandleQuery("GET", "/nothing", {}).body);
  EXPECT_EQ(err.at("error").at("status"), 404);
  EXPECT_TRUE(err.at("error").at("message").is_string());
}

TEST_F(ServiceTest, Predict) {
  // The top spreader of the rally burst is active in the burst slot.
  json s = Get("/events/2/spreaders");
  ASSERT_FALSE(s.at("regime").at("group").empty());
  const std::string top = s.at("regime").at("group")[0].at("entity");
  const int n = std::stoi(top.substr(top.find('-') + 1));
  json p = Get("/predict", {{"s", top}, {"k", "rally"}, {"d", "2016-08-24"}, {"h", "20"}});
  EXPECT_EQ(p.at("community"), n % 2 ? "odd" : "even");
  EXPECT_EQ(p.at("status"), "ok");
  EXPECT_GT(p.at("expected").get<double>(), 0.0);
  // A spreader silent at 20h is predicted zero.
  json quiet = Get("/predict", {{"s", UserName(5)}, {"k", "rally"}, {"d", "2016-08-24"}, {"h", "20"}});
  EXPECT_EQ(quiet.at("hour_share"), 0.0);
  EXPECT_EQ(quiet.at("expected"), 0.0);
  Get("/predict", {{"s", "ghost"}, {"k", "rally"}, {"d", "2016-08-24"}, {"h", "20"}}, 404);
  Get("/predict", {{"s", UserName(5)}, {"k", "never-used"}, {"d", "2016-08-24"}, {"h", "20"}}, 404);
  Get("/predict", {{"s", UserName(5)}, {"k", "rally"}, {"d", "2016-08-24"}, {"h", "24"}}, 400);
}

TEST_F(ServiceTest, TopicsEndpoint) {
  json t = Get("/topics", {{"n", "2"}, {"k", "rally,debate"}});
  EXPECT_EQ(t.at("n"), 2);
  EXPECT_TRUE(t.at("topics").is_array());
}

TEST_F(ServiceTest, RepeatedQueriesAreIdentical) {
  const QueryParams p{{"sigma", "2.5"}};
  auto a = service_->HandleQuery("GET", "/events", p);
  auto b = service_->HandleQuery("GET", "/events", p);
  EXPECT_EQ(a.body, b.body);
  // A fresh service on the same data answers the same.
  Service cold(BuildDataset(ParseLogText(FixtureLog())), std::nullopt);
  EXPECT_EQ(cold.HandleQuery("GET", "/events", p).body, a.body);
  EXPECT_EQ(cold.HandleQuery("GET", "/predict", {{"s", "x"}, {"k", "y"}, {"d", "z"}, {"h", "1"}}).status, 409);
}

TEST_F(ServiceTest, ConcurrentQueriesAgree) {
  const std::string expected = service_->HandleQuery("GET", "/events/1/authors", {}).body;
  std::vector<std::future<std::string>> futures;
  for (int i = 0; i < 8; ++i) {
    futures.push_back(std::async(std::launch::async, [] {
      return service_->HandleQuery("GET", "/events/1/authors", {}).body;
    }));
  }
  for (auto& f : futures) EXPECT_EQ(f.get(), expected);
}

TEST(ServiceUnloaded, AnswersConflict) {
  Service s;
  EXPECT_FALSE(s.loaded());
  EXPECT_EQ(s.HandleQuery("GET", "/schema", {}).status, 200);
  EXPECT_EQ(json::parse(s.HandleQuery("GET", "/schema", {}).body).at("loaded"), false);
  EXPECT_EQ(s.HandleQuery("GET", "/events", {}).status, 409);
  EXPECT_EQ(s.HandleQuery("POST", "/evaluate", {}, "{}").status, 409);
}

TEST(ServiceUnloaded, EmptyDatasetConflicts) {
  Service s(BuildDataset(ParseLogText("")), std::nullopt);
  EXPECT_EQ(s.HandleQuery("GET", "/events", {}).status, 409);
  EXPECT_EQ(s.HandleQuery("GET", "/hashtags", {}).status, 409);
}

TEST(ServiceHttp, ServesOverLoopback) {
  Service s(BuildDataset(ParseLogText("1470009600,a,b,x\n1470013200,c,b,y\n")), std::nullopt);
  std::promise<int> ready;
  std::thread server([&] { s.Serve("127.0.0.1", 0, [&](int port) { ready.set_value(port); }); });
  auto fut = ready.get_future();
  ASSERT_EQ(fut.wait_for(std::chrono::seconds(10)), std::future_status::ready);
  const int port = fut.get();
  httplib::Client client("127.0.0.1", port);
  auto schema = client.Get("/schema");
  ASSERT_TRUE(schema);
  EXPECT_EQ(schema->status, 200);
  EXPECT_EQ(json::parse(schema->body).at("entries"), 2);
  auto missing = client.Get("/events/5/authors");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  auto eval = client.Post("/evaluate", R"({"preset":"basic"})", "application/json");
  ASSERT_TRUE(eval);
  EXPECT_EQ(eval->status, 200);
  s.Stop();
  server.join();
}

}  // namespace
}  // namespace cubelens

#include <doctest.h>

#include <atomic>
#include <thread>

#include "detox/errors.hpp"
#include "service_harness.hpp"

using namespace detox;
using namespace detox::testing;
using nlohmann::json;

TEST_CASE("config validation") {
  auto c = ServiceConfig::with_data_dir(kDataDir);
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.port = 70000;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = c;
  bad.lexicon_path = kDataDir / "missing.txt";
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = c;
  bad.model_path = kDataDir / "missing.model";
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = c;
  bad.profile_path = "/no/such/dir/profile.json";
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("config from environment") {
  auto c = ServiceConfig::with_data_dir(kDataDir);
  ::setenv("DETOX_PORT", "9123", 1);
  ::setenv("DETOX_CORS_ORIGIN", "http://localhost:5173", 1);
  c.apply_env();
  CHECK(c.port == 9123);
  CHECK(c.cors_origin == "http://localhost:5173");
  ::setenv("DETOX_PORT", "eighty", 1);
  CHECK_THROWS_AS(c.apply_env(), ParameterError);
  ::unsetenv("DETOX_PORT");
  ::unsetenv("DETOX_CORS_ORIGIN");
}

TEST_CASE("endpoints equal in-process calls") {
  RunningService svc;
  CHECK(equivalence_cases(svc).size() == 20);
  CHECK(check_equivalence(svc) == "");

  UserProfile p;
  p.sensitivity = 2;
  p.blur_enabled = false;
  p.overrides = {{"coast", -3}};
  p.blacklist = {{"war", false, MatchSource::Blacklist}};
  p.disabled_sites = {"example.com"};
  const auto [status, stored] = svc.call("PUT", "/v1/profile", to_json(p).dump());
  REQUIRE(status == 200);
  CHECK(stored["version"] == 1);
  CHECK(check_equivalence(svc) == "");
}

TEST_CASE("score examples") {
  RunningService svc(false);
  auto [s1, empty] = svc.call("POST", "/v1/score", R"({"text":""})");
  CHECK(s1 == 200);
  CHECK(empty["sum"] == 0);
  CHECK(empty["bucket"] == "neutral");
  auto [s2, r] = svc.call("POST", "/v1/score", R"({"text":"good good bad"})");
  CHECK(s2 == 200);
  CHECK(r["sum"] == 3);
  CHECK(svc.call("POST", "/v1/score", "{").first == 400);
  CHECK(svc.call("POST", "/v1/score", "[1]").first == 400);
  CHECK(svc.call("POST", "/v1/score", R"({"text":3})").first == 400);
  CHECK(svc.call("POST", "/v1/score", R"({"text":"x"})").second.contains("sum"));
  CHECK(svc.call("POST", "/v1/score", "{").second.contains("error"));
}

TEST_CASE("classifier endpoints") {
  SUBCASE("no model") {
    RunningService svc(false);
    CHECK(svc.call("POST", "/v1/classify", R"({"text":"cup final"})").first == 503);
    const auto [status, health] = svc.call("GET", "/v1/health");
    CHECK(status == 200);
    CHECK(health["model_loaded"] == false);
  }
  SUBCASE("with model") {
    RunningService svc;
    const auto [status, pred] = svc.call("POST", "/v1/classify", R"({"text":"Local team wins the cup final"})");
    CHECK(status == 200);
    CHECK(pred["category"] == "sports");
    const auto [ks, kw] =
        svc.call("POST", "/v1/keywords", R"({"text":"covid cases surge as covid wave hits","k":2})");
    CHECK(ks == 200);
    REQUIRE(kw["tags"].size() == 2);
    CHECK(kw["tags"][0]["token"] == "covid");
    CHECK(kw["tags"][1]["token"] == "cases");
    for (const char* bad : {R"({"text":"x","k":0})", R"({"text":"x","k":-1})", R"({"text":"x","k":"2"})",
                            R"({"text":"x","k":1.5})"}) {
      CHECK(svc.call("POST", "/v1/keywords", bad).first == 400);
    }
  }
}

TEST_CASE("filter and originals") {
  RunningService svc;
  const auto serp = read_file(kFixtureDir / "serp.html");
  const json body{{"html", serp}, {"site_id", "google-serp"}, {"mode", "search"}};
  const auto [status, r] = svc.call("POST", "/v1/filter", body.dump());
  REQUIRE(status == 200);
  CHECK(r["health"]["status"] == "ok");
  int placeholders = 0;
  std::size_t flagged = 0;
  for (const auto& d : r["decisions"]) {
    if (d["action"] == "placeholder") {
      ++placeholders;
      flagged = d["item_id"].get<std::size_t>();
    }
    for (const char* key : {"item_id", "action", "reason", "sentiment", "domain", "hits"}) {
      CHECK(d.contains(key));
    }
  }
  CHECK(placeholders == 1);

  const auto session = r["session"].get<std::uint64_t>();
  const auto path = "/v1/original/" + std::to_string(flagged) + "?session=" + std::to_string(session);
  const auto [os, original] = svc.call("GET", path);
  CHECK(os == 200);
  CHECK(serp.find(original["html"].get<std::string>()) != std::string::npos);
  CHECK(svc.call("GET", "/v1/original/999?session=" + std::to_string(session)).first == 404);
  CHECK(svc.call("GET", "/v1/original/0?session=abc").first == 400);

  const auto again = svc.call("POST", "/v1/filter", body.dump()).second;
  CHECK(again["html"] == r["html"]);
  CHECK(again["decisions"] == r["decisions"]);

  CHECK(svc.call("POST", "/v1/filter", json{{"html", serp}, {"site_id", "bing"}}.dump()).first == 404);
  CHECK(svc.call("POST", "/v1/filter", json{{"html", serp}, {"site_id", "google-serp"}, {"mode", "x"}}.dump())
            .first == 400);
  CHECK(svc.call("POST", "/v1/filter", json{{"site_id", "google-serp"}}.dump()).first == 400);
}

TEST_CASE("oversized body") {
  RunningService svc(false, 1024);
  const json body{{"html", std::string(4096, 'x')}, {"site_id", "google-serp"}};
  CHECK(svc.call("POST", "/v1/filter", body.dump()).first == 413);
  CHECK(svc.call("POST", "/v1/score", R"({"text":"fine"})").first == 200);
}

TEST_CASE("scan") {
  RunningService svc(false);
  UserProfile p;
  p.blacklist = {{"covid", false, MatchSource::Blacklist}};
  REQUIRE(svc.call("PUT", "/v1/profile", to_json(p).dump()).first == 200);
  const auto [status, r] =
      svc.call("POST", "/v1/scan", json{{"content", "Covid cases rise"}, {"site", "news.example.com"}}.dump());
  CHECK(status == 200);
  CHECK(r["warn"] == true);
  CHECK(r["hits"].size() == 1);
  CHECK(svc.call("POST", "/v1/scan", R"({"content":"x"})").first == 400);
}

TEST_CASE("profile endpoints") {
  RunningService svc(false);
  const auto [gs, fresh] = svc.call("GET", "/v1/profile");
  CHECK(gs == 200);
  CHECK(fresh["version"] == 0);
  CHECK(profile_from_json(fresh) == UserProfile{});

  auto draft = fresh;
  draft["sensitivity"] = 3;
  const auto [ps, stored] = svc.call("PUT", "/v1/profile", draft.dump());
  CHECK(ps == 200);
  CHECK(stored["version"] == 1);
  const auto now = svc.call("GET", "/v1/profile").second;
  CHECK(now["sensitivity"] == 3);
  CHECK(now["version"] == 1);
  CHECK(load_profile_file(svc.dir() / "profile.json") == profile_from_json(now));

  CHECK(svc.call("PUT", "/v1/profile", draft.dump()).first == 409);
  auto invalid = now;
  invalid["sensitivity"] = 9;
  const auto [vs, verr] = svc.call("PUT", "/v1/profile", invalid.dump());
  CHECK(vs == 422);
  CHECK(verr["fields"] == json{"sensitivity"});
  CHECK(svc.call("PUT", "/v1/profile", R"({"version":1,"colour":"red"})").first == 422);
  CHECK(svc.call("PUT", "/v1/profile", "{").first == 400);
  CHECK(svc.call("GET", "/v1/profile").second == now);
}

TEST_CASE("concurrent stale PUTs") {
  RunningService svc(false);
  for (int round = 0; round < 10; ++round) {
    const auto base = svc.call("GET", "/v1/profile").second;
    std::atomic<int> ok{0};
    std::atomic<int> conflict{0};
    std::vector<std::thread> writers;
    for (int t = 0; t < 2; ++t) {
      writers.emplace_back([&, t] {
        auto mine = base;
        mine["sensitivity"] = t - 1;
        const int status = svc.call("PUT", "/v1/profile", mine.dump()).first;
        if (status == 200) ++ok;
        if (status == 409) ++conflict;
      });
    }
    for (auto& w : writers) w.join();
    CHECK(ok == 1);
    CHECK(conflict == 1);
  }
  CHECK(svc.call("GET", "/v1/profile").second["version"] == 10);
}

TEST_CASE("health and CORS") {
  RunningService svc;
  auto client = svc.client();
  const auto r = client.Get("/v1/health");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
  const auto health = json::parse(r->body);
  CHECK(health["status"] == "ok");
  CHECK(health["lexicon_terms"] == 2477);
  CHECK(health["model_loaded"] == true);
  CHECK(health["patterns"] == json{"google-serp"});

  const auto pre = client.Options("/v1/profile");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("PUT") != std::string::npos);
}

TEST_CASE("concurrent filters share the engine safely") {
  RunningService svc;
  const json body{{"html", read_file(kFixtureDir / "serp_mixed.html")}, {"site_id", "google-serp"}};
  const auto expected = svc.call("POST", "/v1/filter", body.dump()).second["html"];
  std::atomic<int> same{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 5; ++i) {
        if (svc.call("POST", "/v1/filter", body.dump()).second["html"] == expected) ++same;
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(same == 40);
}

#include <doctest.h>

#include <random>
#include <sstream>

#include "detox/errors.hpp"
#include "detox/matchlist.hpp"
#include "detox/text_util.hpp"
#include "support.hpp"

using namespace detox;

namespace {

MatchTerm lit(std::string p) { return {std::move(p), false, MatchSource::Blacklist}; }
MatchTerm raw(std::string p) { return {std::move(p), true, MatchSource::Blacklist}; }

bool word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Sliding-window oracle for literal terms.
std::vector<std::pair<std::size_t, std::size_t>> oracle(const std::vector<std::string>& terms,
                                                        const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto lower = ascii_lower(text);
  std::size_t pos = 0;
  while (pos < text.size()) {
    bool hit = false;
    for (const auto& t : terms) {
      const auto lt = ascii_lower(t);
      if (pos + lt.size() > lower.size() || lower.compare(pos, lt.size(), lt) != 0) continue;
      if (pos > 0 && word_char(text[pos - 1])) continue;
      const auto end = pos + lt.size();
      if (end < text.size() && word_char(text[end])) continue;
      out.emplace_back(pos, end);
      pos = end;
      hit = true;
      break;
    }
    if (!hit) ++pos;
  }
  return out;
}

}  // namespace

TEST_CASE("compile and find_all examples") {
  SUBCASE("empty list matches nothing") {
    const auto m = CompiledMatcher::compile({});
    CHECK(m.empty());
    CHECK(m.find_all("anything at all").empty());
  }
  SUBCASE("word boundary before a hyphen") {
    const auto hits = CompiledMatcher::compile({lit("covid")}).find_all("COVID-19 cases");
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].start == 0);
    CHECK(hits[0].end == 5);
    CHECK(hits[0].term == lit("covid"));
  }
  SUBCASE("metacharacters are escaped") {
    const auto m = CompiledMatcher::compile({lit("c++")});
    CHECK(m.find_all("learn c++ fast").size() == 1);
    CHECK(m.find_all("learn cc fast").empty());
    CHECK(CompiledMatcher::compile({lit("a.b")}).find_all("axb a.b").size() == 1);
    CHECK(CompiledMatcher::compile({lit("(x)")}).find_all("f (x) g").size() == 1);
  }
  SUBCASE("standalone word only") {
    const auto hits = CompiledMatcher::compile({lit("war")}).find_all("warmth of postwar war stories");
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].start == 18);
    CHECK(hits[0].end == 21);
  }
  SUBCASE("document order") {
    const auto hits =
        CompiledMatcher::compile({lit("war"), lit("bomb")}).find_all("war and bomb and war");
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].term.pattern == "war");
    CHECK(hits[1].term.pattern == "bomb");
    CHECK(hits[2].term.pattern == "war");
    CHECK(hits[0].start < hits[1].start);
    CHECK(hits[1].start < hits[2].start);
  }
  SUBCASE("empty text") {
    CHECK(CompiledMatcher::compile({lit("war")}).find_all("").empty());
  }
  SUBCASE("multi-word literal") {
    CHECK(CompiledMatcher::compile({lit("climate change")}).find_all("Climate Change talks").size() == 1);
  }
  SUBCASE("earliest term wins at one position") {
    const auto hits = CompiledMatcher::compile({lit("new"), lit("new york")}).find_all("new york");
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].term.pattern == "new");
  }
}

TEST_CASE("raw regex terms") {
  const auto m = CompiledMatcher::compile({raw("bomb(s|ing)?"), lit("war")});
  const auto hits = m.find_all("Bombing and war, bombs!");
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].end - hits[0].start == 7);
  CHECK(hits[1].term.pattern == "war");
  CHECK(hits[2].term.pattern == "bomb(s|ing)?");

  SUBCASE("groups inside raw patterns do not confuse term attribution") {
    const auto m2 = CompiledMatcher::compile({raw("(a)(b)(c)"), lit("zed")});
    const auto h = m2.find_all("abc zed");
    REQUIRE(h.size() == 2);
    CHECK(h[0].term.pattern == "(a)(b)(c)");
    CHECK(h[1].term.pattern == "zed");
  }
  SUBCASE("empty matches are skipped") {
    CHECK(CompiledMatcher::compile({raw("x*")}).find_all("abc").empty());
  }
  SUBCASE("invalid regex names the term") {
    try {
      CompiledMatcher::compile({lit("ok"), raw("foo(")});
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("foo(") != std::string::npos);
    }
  }
  SUBCASE("empty pattern rejected") { CHECK_THROWS_AS(CompiledMatcher::compile({lit("")}), ParseError); }
}

TEST_CASE("excerpt") {
  const std::string text(200, 'x');
  const auto e = make_excerpt(text, 100, 103);
  CHECK(e.size() <= kExcerptBytes);
  CHECK(e.find("xxx") != std::string::npos);
  CHECK(make_excerpt("short war text", 6, 9) == "short war text");

  SUBCASE("never splits a UTF-8 sequence") {
    std::string t;
    for (int i = 0; i < 60; ++i) t += "\xC3\xA9";
    const auto start = t.size();
    t += "war";
    for (int i = 0; i < 60; ++i) t += "\xC3\xA9";
    const auto ex = make_excerpt(t, start, start + 3);
    CHECK(ex.size() <= kExcerptBytes);
    CHECK(ex.find("war") != std::string::npos);
    CHECK((static_cast<unsigned char>(ex.front()) & 0xC0) != 0x80);
    CHECK(static_cast<unsigned char>(ex.back()) < 0xC0);
    CHECK(ex.size() % 2 == 1);
  }
  SUBCASE("long hit returned whole") {
    const std::string long_hit(120, 'a');
    CHECK(make_excerpt(long_hit, 0, 120) == long_hit);
  }
}

TEST_CASE("word lists") {
  std::istringstream in("  Damn \n\ncrap\r\n");
  const auto terms = load_word_list(in, MatchSource::Profanity);
  REQUIRE(terms.size() == 2);
  CHECK(terms[0].pattern == "damn");
  CHECK(terms[1].pattern == "crap");
  CHECK(terms[0].source == MatchSource::Profanity);

  const auto& shipped = detox::testing::profanity();
  CHECK(shipped.terms().size() > 1000);
  CHECK_FALSE(shipped.find_all("What a damn mess").empty());
  CHECK(shipped.find_all("The classic assessment").empty());
  CHECK(match_source_from_string(to_string(MatchSource::Profanity)) == MatchSource::Profanity);
}

TEST_CASE("property: literal matching equals the sliding-window oracle") {
  const std::string alphabet = "abAB -+_.";
  std::mt19937 rng(99);
  auto random_string = [&](int lo, int hi) {
    std::string s;
    const int n = std::uniform_int_distribution<int>(lo, hi)(rng);
    for (int i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int round = 0; round < 2000; ++round) {
    std::vector<std::string> patterns;
    std::vector<MatchTerm> terms;
    const int nterms = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < nterms; ++i) {
      auto p = random_string(1, 3);
      patterns.push_back(p);
      terms.push_back(lit(p));
    }
    const auto text = random_string(0, 30);
    const auto m = CompiledMatcher::compile(terms);
    const auto hits = m.find_all(text);
    const auto expected = oracle(patterns, text);
    REQUIRE(hits.size() == expected.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
      CHECK(hits[i].start == expected[i].first);
      CHECK(hits[i].end == expected[i].second);
      // Soundness: the slice equals the term, case-folded.
      CHECK(ascii_lower(text.substr(hits[i].start, hits[i].end - hits[i].start)) ==
            ascii_lower(hits[i].term.pattern));
      CHECK(hits[i].excerpt.find(text.substr(hits[i].start, hits[i].end - hits[i].start)) !=
            std::string::npos);
    }
    CHECK(m.find_all(text) == hits);
  }
}

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "detox/errors.hpp"
#include "detox/lexicon.hpp"
#include "support.hpp"

using namespace detox;
using detox::testing::afinn;

namespace {

using Tokens = std::vector<std::string>;

Lexicon lex_from(const std::string& text) {
  std::istringstream in(text);
  return Lexicon::load(in);
}

std::vector<std::string> single_token_terms() {
  std::vector<std::string> out;
  for (const auto& [term, s] : afinn().entries()) {
    if (term.find(' ') == std::string::npos && tokenize(term) == Tokens{term}) out.push_back(term);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("COVID-19 cases rise!") == Tokens{"covid-19", "cases", "rise"});
  CHECK(tokenize("Can't stand it") == Tokens{"can't", "stand", "it"});
  CHECK(tokenize("  -dash- 'quoted' end-") == Tokens{"dash", "quoted", "end"});
  CHECK(tokenize("rock--roll o''clock") == Tokens{"rock", "roll", "o", "clock"});
  CHECK(tokenize("it\xE2\x80\x99s fine") == Tokens{"it's", "fine"});
  CHECK(tokenize("Na\xC3\xAFve CAF\xC3\x89") == Tokens{"na\xC3\xAFve", "caf\xC3\xA9"});
  CHECK(tokenize("good\xF0\x9F\x98\x80great") == Tokens{"good", "great"});
  CHECK(tokenize("a,b;c") == Tokens{"a", "b", "c"});
}

TEST_CASE("normalize_term joins tokens with single spaces") {
  CHECK(normalize_term("  Not   GOOD ") == "not good");
  CHECK(normalize_term("") == "");
}

TEST_CASE("load_lexicon") {
  SUBCASE("single entry") {
    const auto lex = lex_from("good\t3\n");
    CHECK(lex.size() == 1);
    CHECK(lex.find("good") == 3);
    CHECK(lex.max_phrase_len() == 1);
  }
  SUBCASE("phrase") {
    const auto lex = lex_from("not good\t-2\n");
    CHECK(lex.find("not good") == -2);
    CHECK(lex.max_phrase_len() == 2);
  }
  SUBCASE("non-integer score names the line") {
    try {
      lex_from("bad\tx\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    try {
      lex_from("good\t3\nbad\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(lex_from("great\t6\n"), RangeError);
    CHECK_THROWS_AS(lex_from("awful\t-6\n"), RangeError);
  }
  SUBCASE("malformed lines") {
    CHECK_THROWS_AS(lex_from("\n"), ParseError);
    CHECK_THROWS_AS(lex_from("a\t1\t2\n"), ParseError);
    CHECK_THROWS_AS(lex_from("Good\t1\n"), ParseError);
  }
  SUBCASE("later duplicates overwrite") {
    const auto lex = lex_from("good\t3\ngood\t1\n");
    CHECK(lex.size() == 1);
    CHECK(lex.find("good") == 1);
  }
  SUBCASE("no trailing newline") {
    CHECK(lex_from("good\t3\nbad\t-3").size() == 2);
  }
}

TEST_CASE("shipped lexicon file") {
  const auto& lex = afinn();
  CHECK(lex.size() == 2477);
  CHECK(lex.max_phrase_len() == 3);
  int longest = 0;
  for (const auto& [term, s] : lex.entries()) {
    CHECK(normalize_term(term) == term);
    CHECK(s >= kMinScore);
    CHECK(s <= kMaxScore);
    longest = std::max(longest, static_cast<int>(tokenize(term).size()));
  }
  CHECK(longest == lex.max_phrase_len());
  CHECK(lex.find("good") == 3);
  CHECK(lex.find("bad") == -3);
  CHECK(lex.find("catastrophic") == -4);
  CHECK(lex.find("not good") == -2);
}

TEST_CASE("score examples") {
  const auto& L = afinn();
  {
    const auto r = score("", L, {}, 0);
    CHECK(r.sum == 0);
    CHECK(r.bucket == Bucket::Neutral);
    CHECK_FALSE(r.flagged);
    CHECK(r.token_count == 0);
  }
  {
    const auto r = score("good good bad", L, {}, 0);
    CHECK(r.sum == 3);
    CHECK(r.bucket == Bucket::Positive);
    CHECK_FALSE(r.flagged);
    CHECK(r.matches.size() == 3);
  }
  {
    const auto r = score("not good", L, {}, 0);
    CHECK(r.sum == -2);
    REQUIRE(r.matches.size() == 1);
    CHECK(r.matches[0] == SentimentMatch{"not good", -2, 0});
  }
  {
    const std::vector<PolarityOverride> o{{"good", -1}};
    const auto r = score("good", L, o, 0);
    CHECK(r.sum == -1);
    CHECK(r.flagged);
  }
  {
    const auto r = score("bad catastrophic news", L, {}, 0);
    CHECK(r.sum == -7);
    CHECK(r.bucket == Bucket::StronglyNegative);
  }
}

TEST_CASE("score phrase handling") {
  const auto& L = afinn();
  SUBCASE("override phrase longer than any lexicon entry") {
    const std::vector<PolarityOverride> o{{"new sea wall plan", 4}};
    const auto r = score("the new sea wall plan is bad", L, o, 0);
    CHECK(r.sum == 1);
    CHECK(r.matches[0].term == "new sea wall plan");
    CHECK(r.matches[0].token_index == 1);
  }
  SUBCASE("override at a shorter length does not break a lexicon phrase") {
    const std::vector<PolarityOverride> o{{"good", 5}};
    CHECK(score("not good", L, o, 0).sum == -2);
  }
  SUBCASE("override of a phrase shadows it") {
    const std::vector<PolarityOverride> o{{"not good", 1}};
    CHECK(score("not good", L, o, 0).sum == 1);
  }
  SUBCASE("zero-valued entries still consume their tokens") {
    const auto r = score("some kind of good", L, {}, 0);
    CHECK(r.sum == 3);
    CHECK(r.matches.size() == 2);
  }
  SUBCASE("token indices") {
    const auto r = score("it is not good but happy", L, {}, 0);
    REQUIRE(r.matches.size() == 2);
    CHECK(r.matches[0].token_index == 2);
    CHECK(r.matches[1].token_index == 5);
    CHECK(r.token_count == 6);
  }
}

TEST_CASE("bucket_of") {
  CHECK(bucket_of(0) == Bucket::Neutral);
  CHECK(bucket_of(-4) == Bucket::StronglyNegative);
  CHECK(bucket_of(-3) == Bucket::Negative);
  CHECK(bucket_of(3) == Bucket::Positive);
  CHECK(bucket_of(4) == Bucket::StronglyPositive);
  for (int s = -100; s < 100; ++s) CHECK(bucket_of(s) <= bucket_of(s + 1));
  for (auto b : {Bucket::StronglyNegative, Bucket::Negative, Bucket::Neutral, Bucket::Positive,
                 Bucket::StronglyPositive}) {
    CHECK(bucket_from_string(to_string(b)) == b);
  }
  CHECK_FALSE(bucket_from_string("meh"));
}

TEST_CASE("property: report invariants and oracle equivalence") {
  const auto& L = afinn();
  const auto words = single_token_terms();
  const std::vector<std::string> noise{"zxq", "harbour", "table", "the", "blorp", "42"};
  std::mt19937 rng(7);
  for (int round = 0; round < 300; ++round) {
    std::string text;
    int oracle = 0;
    const int n = std::uniform_int_distribution<int>(0, 20)(rng);
    for (int i = 0; i < n; ++i) {
      std::string w;
      if (rng() % 2 == 0) {
        w = words[rng() % words.size()];
        oracle += *L.find(w);
      } else {
        w = noise[rng() % noise.size()];
      }
      text += (i ? " " : "") + w;
    }
    // Adjacent single words can form a lexicon phrase; the oracle only
    // applies when none does.
    const auto toks = tokenize(text);
    bool phrase = false;
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      if (L.find(toks[i] + " " + toks[i + 1])) phrase = true;
      if (i + 2 < toks.size() && L.find(toks[i] + " " + toks[i + 1] + " " + toks[i + 2])) phrase = true;
    }
    const auto r = score(text, L, {}, 0);
    int total = 0;
    for (const auto& m : r.matches) total += m.score;
    CHECK(r.sum == total);
    CHECK(r.bucket == bucket_of(r.sum));
    CHECK(r.flagged == (r.sum < 0));
    if (!phrase) CHECK(r.sum == oracle);
  }
}

TEST_CASE("property: additivity across a boundary with no spanning phrase") {
  const auto& L = afinn();
  const auto words = single_token_terms();
  std::mt19937 rng(11);
  auto random_text = [&] {
    std::string t;
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    for (int i = 0; i < n; ++i) t += (i ? " " : "") + words[rng() % words.size()];
    return t;
  };
  for (int round = 0; round < 300; ++round) {
    const auto a = random_text();
    const auto b = random_text();
    const auto ta = tokenize(a);
    const auto tb = tokenize(b);
    bool spans = false;
    for (int left = 1; left <= 2; ++left) {
      for (int right = 1; left + right <= 3; ++right) {
        if (static_cast<int>(ta.size()) < left || static_cast<int>(tb.size()) < right) continue;
        std::string phrase;
        for (int i = static_cast<int>(ta.size()) - left; i < static_cast<int>(ta.size()); ++i) phrase += ta[i] + " ";
        for (int i = 0; i < right; ++i) phrase += tb[i] + (i + 1 < right ? " " : "");
        if (L.find(phrase)) spans = true;
      }
    }
    if (spans) continue;
    CHECK(score(a + " " + b, L, {}, 0).sum == score(a, L, {}, 0).sum + score(b, L, {}, 0).sum);
  }
}

TEST_CASE("property: override dominance") {
  const auto& L = afinn();
  const auto words = single_token_terms();
  std::mt19937 rng(23);
  for (int round = 0; round < 200; ++round) {
    std::string text;
    for (int i = 0; i < 10; ++i) text += (i ? " " : "") + words[rng() % words.size()];
    const auto toks = tokenize(text);
    const auto target = toks[rng() % toks.size()];
    const int s = std::uniform_int_distribution<int>(kMinScore, kMaxScore)(rng);
    const std::vector<PolarityOverride> o{{target, s}};
    const auto base = score(text, L, {}, 0);
    const auto over = score(text, L, o, 0);
    REQUIRE(base.matches.size() == over.matches.size());
    for (std::size_t i = 0; i < base.matches.size(); ++i) {
      CHECK(base.matches[i].term == over.matches[i].term);
      CHECK(base.matches[i].token_index == over.matches[i].token_index);
      CHECK(over.matches[i].score == (over.matches[i].term == target ? s : base.matches[i].score));
    }
  }
}

TEST_CASE("property: flag monotonicity in threshold") {
  const auto& L = afinn();
  const auto words = single_token_terms();
  std::mt19937 rng(5);
  for (int round = 0; round < 200; ++round) {
    std::string text;
    for (int i = 0; i < 6; ++i) text += (i ? " " : "") + words[rng() % words.size()];
    for (int t1 = kMinScore; t1 <= kMaxScore; ++t1) {
      for (int t2 = t1; t2 <= kMaxScore; ++t2) {
        if (score(text, L, {}, t1).flagged) CHECK(score(text, L, {}, t2).flagged);
      }
    }
  }
}

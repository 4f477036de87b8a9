#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include <stdlib.h>

#include "detox/extraction.hpp"
#include "detox/lexicon.hpp"
#include "detox/matchlist.hpp"
#include "detox/pipeline.hpp"
#include "detox/profile.hpp"
#include "detox/textmodel.hpp"

namespace detox::testing {

inline const std::filesystem::path kDataDir = DETOX_DATA_DIR;
inline const std::filesystem::path kFixtureDir = DETOX_FIXTURE_DIR;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const Lexicon& afinn() {
  static const Lexicon lex = Lexicon::load_file(kDataDir / "AFINN-111.txt");
  return lex;
}

inline const StopwordSet& stopwords() {
  static const StopwordSet s = load_stopwords_file(kDataDir / "stopwords.txt");
  return s;
}

inline const CompiledMatcher& profanity() {
  static const CompiledMatcher m =
      CompiledMatcher::compile(load_word_list_file(kDataDir / "profanity.txt", MatchSource::Profanity));
  return m;
}

inline const PatternSet& serp_patterns() {
  static const PatternSet p = load_patterns_file(kDataDir / "patterns" / "google-serp.json");
  return p;
}

inline const ClassifierModel& tiny_model() {
  static const ClassifierModel m = train(ingest_csv_file(kFixtureDir / "headlines_tiny.csv"));
  return m;
}

/// Shipped data plus a classifier trained on the tiny headline fixture.
inline Engine engine() {
  Engine e;
  e.lexicon = &afinn();
  e.stopwords = &stopwords();
  e.profanity = &profanity();
  e.model = &tiny_model();
  return e;
}

inline const std::vector<std::string>& html_fixtures() {
  static const std::vector<std::string> names{"serp.html", "serp_mixed.html", "serp_drift.html",
                                              "article.html"};
  return names;
}

/// A valid profile drawn from terms that occur in the fixtures.
inline UserProfile random_profile(std::mt19937& rng) {
  static const std::vector<std::string> terms{"war", "flood", "marathon", "crash", "coast",
                                              "heat", "museum", "bank", "good", "happy"};
  auto coin = [&] { return rng() % 2 == 0; };
  UserProfile p;
  p.sensitivity = std::uniform_int_distribution<int>(kMinScore, kMaxScore)(rng);
  p.blur_enabled = coin();
  p.profanity_enabled = coin();
  const auto n_overrides = rng() % 3;
  for (std::size_t i = 0; i < n_overrides; ++i) {
    const auto& t = terms[rng() % terms.size()];
    if (std::none_of(p.overrides.begin(), p.overrides.end(),
                     [&](const PolarityOverride& o) { return o.term == t; })) {
      p.overrides.push_back({t, std::uniform_int_distribution<int>(kMinScore, kMaxScore)(rng)});
    }
  }
  const auto n_black = rng() % 3;
  for (std::size_t i = 0; i < n_black; ++i) {
    p.blacklist.push_back({terms[rng() % terms.size()], false, MatchSource::Blacklist});
  }
  if (rng() % 4 == 0) p.blacklist.push_back({"(flood|crash)(s|ed)?", true, MatchSource::Blacklist});
  if (rng() % 4 == 0) p.disabled_sites.push_back("example.com");
  return p;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path() / "detox-test-XXXXXX";
    std::string tmpl = base.string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace detox::testing

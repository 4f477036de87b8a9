#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detox/extraction.hpp"
#include "detox/lexicon.hpp"
#include "detox/matchlist.hpp"
#include "detox/profile.hpp"
#include "detox/textmodel.hpp"

namespace detox {

enum class Mode { SearchResults, GenericPage };
enum class Action { Keep, Annotate, Blur, Remove, Placeholder };
/// Excluded marks items kept because their host is on the pattern set's
/// exclusion list.
enum class Reason { Blacklist, Profanity, Sentiment, Excluded };

std::string_view to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view name);
std::string_view to_string(Action action);
std::string_view to_string(Reason reason);

/// Shipped data shared by every request. Not owned.
struct Engine {
  const Lexicon* lexicon = nullptr;
  const StopwordSet* stopwords = nullptr;
  /// Compiled profanity list; null disables profanity checks entirely.
  const CompiledMatcher* profanity = nullptr;
  /// Optional; without it flagged items carry no category.
  const ClassifierModel* model = nullptr;
  std::size_t keyword_count = kDefaultKeywordCount;
  /// Run classifier and keyword tagging on every item, not just flagged ones.
  bool deep_analysis_all = false;
};

/// Matchers derived from a profile: its blacklist, plus the engine's
/// profanity list when the profile enables it.
struct Matchers {
  CompiledMatcher blacklist;
  const CompiledMatcher* profanity = nullptr;
};

Matchers build_matchers(const UserProfile& profile, const Engine& engine);

struct FilterDecision {
  std::size_t item_id = 0;
  Action action = Action::Keep;
  Reason reason = Reason::Sentiment;
  SentimentReport sentiment;
  std::optional<Prediction> category;
  std::optional<KeywordTags> keywords;
  std::string domain;
  std::vector<MatchHit> hits;

  friend bool operator==(const FilterDecision&, const FilterDecision&) = default;
};

/// Policy, in order: excluded host -> Keep; blacklist or profanity hit ->
/// Blur (or Remove when blur is off in search mode); sentiment sum below the
/// profile's sensitivity -> Placeholder with category and keywords;
/// otherwise Annotate.
FilterDecision decide(const ExtractedItem& item, const UserProfile& profile, const Engine& engine,
                      const Matchers& matchers, Mode mode);

struct FilteredDocument {
  std::string html;
  std::vector<FilterDecision> decisions;
  /// Original container markup for every non-Keep decision.
  std::map<std::size_t, std::string> originals;
  HealthReport health;
};

/// Extracts, decides and rewrites. Containers already inside a data-detox
/// marker are left alone, so the output is a fixed point of this function.
/// New item ids continue after the largest data-detox-id in the input.
FilteredDocument filter_document(std::string html, const PatternSet& patterns,
                                 const UserProfile& profile, const Engine& engine, Mode mode);

/// Swaps the marker for `item_id` back to the original markup and marks the
/// decision Keep. Throws NotFoundError for unknown ids or missing markers.
FilteredDocument reinstate(FilteredDocument doc, std::size_t item_id);

struct ScanReport {
  std::string site;
  std::vector<MatchHit> hits;
  bool warn = false;
};

/// Blacklist scan of an arbitrary page (markup is reduced to text first).
/// warn <=> hits non-empty and the site is not disabled in the profile.
ScanReport scan_page(std::string_view text_or_html, std::string_view site,
                     const UserProfile& profile);

}  // namespace detox

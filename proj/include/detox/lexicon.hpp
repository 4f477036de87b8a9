#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "detox/text_util.hpp"

namespace detox {

inline constexpr int kMinScore = -5;
inline constexpr int kMaxScore = 5;

/// Splits text into lowercase tokens: maximal runs of letters and digits,
/// keeping apostrophes and hyphens that sit between two such characters.
/// Non-ASCII letters are kept; U+2019 is folded to an ASCII apostrophe.
std::vector<std::string> tokenize(std::string_view text);

/// Canonical form of a term: its tokens joined by single spaces.
std::string normalize_term(std::string_view term);

enum class Bucket { StronglyNegative, Negative, Neutral, Positive, StronglyPositive };

std::string_view to_string(Bucket bucket);
std::optional<Bucket> bucket_from_string(std::string_view name);

/// sum <= -4 strongly negative, sum >= 4 strongly positive, sign otherwise.
Bucket bucket_of(int sum);

using TermScores = std::unordered_map<std::string, int, StringHash, std::equal_to<>>;

struct PolarityOverride {
  std::string term;
  int score = 0;

  friend bool operator==(const PolarityOverride&, const PolarityOverride&) = default;
};

/// Term -> valence table. Terms are canonical (see normalize_term) and may
/// span several tokens.
class Lexicon {
 public:
  Lexicon() = default;

  /// Reads `term<TAB>score` lines. Later duplicates overwrite earlier ones.
  /// Throws ParseError (with the 1-based line number) or RangeError.
  static Lexicon load(std::istream& in);
  static Lexicon load_file(const std::filesystem::path& path);

  /// Throws ParseError for non-canonical terms, RangeError for bad scores.
  void insert(std::string term, int score);

  std::optional<int> find(std::string_view term) const;
  std::size_t size() const noexcept { return entries_.size(); }
  int max_phrase_len() const noexcept { return max_phrase_len_; }
  const TermScores& entries() const noexcept { return entries_; }

 private:
  TermScores entries_;
  int max_phrase_len_ = 1;
};

struct SentimentMatch {
  std::string term;
  int score = 0;
  std::size_t token_index = 0;

  friend bool operator==(const SentimentMatch&, const SentimentMatch&) = default;
};

struct SentimentReport {
  int sum = 0;
  std::vector<SentimentMatch> matches;
  std::size_t token_count = 0;
  Bucket bucket = Bucket::Neutral;
  bool flagged = false;
  int threshold = 0;

  friend bool operator==(const SentimentReport&, const SentimentReport&) = default;
};

/// Greedy left-to-right scoring. At each token position the longest phrase
/// wins; for a given length an override shadows the lexicon entry. Each
/// token belongs to at most one match. flagged <=> sum < threshold.
SentimentReport score(std::string_view text, const Lexicon& lexicon,
                      std::span<const PolarityOverride> overrides, int threshold);

}  // namespace detox

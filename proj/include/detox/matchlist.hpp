#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace detox {

enum class MatchSource { Blacklist, Profanity };

std::string_view to_string(MatchSource source);
std::optional<MatchSource> match_source_from_string(std::string_view name);

struct MatchTerm {
  std::string pattern;
  bool is_raw_regex = false;
  MatchSource source = MatchSource::Blacklist;

  friend bool operator==(const MatchTerm&, const MatchTerm&) = default;
};

struct MatchHit {
  MatchTerm term;
  std::size_t start = 0;
  std::size_t end = 0;
  /// Window of at most kExcerptBytes around the hit (wider only when the
  /// hit itself is longer), cut on UTF-8 character boundaries.
  std::string excerpt;

  friend bool operator==(const MatchHit&, const MatchHit&) = default;
};

inline constexpr std::size_t kExcerptBytes = 80;

/// Immutable matcher over a term list. Literal terms are escaped and
/// anchored so that they neither start nor end inside a word
/// ([A-Za-z0-9_]); all matching is ASCII case-insensitive.
class CompiledMatcher {
 public:
  CompiledMatcher();
  ~CompiledMatcher();
  CompiledMatcher(const CompiledMatcher&);
  CompiledMatcher& operator=(const CompiledMatcher&);
  CompiledMatcher(CompiledMatcher&&) noexcept;
  CompiledMatcher& operator=(CompiledMatcher&&) noexcept;

  /// Throws ParseError naming the first raw-regex term that does not compile.
  static CompiledMatcher compile(std::vector<MatchTerm> terms);

  /// Non-overlapping hits in document order. At a given start position the
  /// earliest term in list order wins.
  std::vector<MatchHit> find_all(std::string_view text) const;

  bool empty() const noexcept { return terms_.empty(); }
  const std::vector<MatchTerm>& terms() const noexcept { return terms_; }

 private:
  struct Impl;
  std::vector<MatchTerm> terms_;
  std::shared_ptr<const Impl> impl_;
};

/// Escapes regex metacharacters in `literal` and wraps it in word-boundary
/// lookarounds.
std::string literal_pattern(std::string_view literal);

/// One term per non-blank line, lowercased and trimmed.
std::vector<MatchTerm> load_word_list(std::istream& in, MatchSource source);
std::vector<MatchTerm> load_word_list_file(const std::filesystem::path& path, MatchSource source);

std::string make_excerpt(std::string_view text, std::size_t start, std::size_t end);

}  // namespace detox

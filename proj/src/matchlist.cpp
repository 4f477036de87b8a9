#include "detox/matchlist.hpp"

#include <boost/regex.hpp>
#include <fstream>
#include <istream>
#include <set>
#include <unordered_map>

#include "detox/errors.hpp"
#include "detox/text_util.hpp"

namespace detox {

namespace {

constexpr auto kFlags = boost::regex::perl | boost::regex::icase;

bool is_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

bool is_word_byte(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

// Literal terms are looked up by (lowercased) text at positions where a
// word can start; raw terms share one alternation regex.
struct CompiledMatcher::Impl {
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> literal_term;
  std::vector<std::size_t> literal_lengths;

  boost::regex raw;
  std::vector<std::size_t> raw_term;   // term index of each alternative
  std::vector<std::size_t> raw_group;  // capture group wrapping each alternative
};

std::string_view to_string(MatchSource source) {
  return source == MatchSource::Blacklist ? "blacklist" : "profanity";
}

std::optional<MatchSource> match_source_from_string(std::string_view name) {
  if (name == "blacklist") return MatchSource::Blacklist;
  if (name == "profanity") return MatchSource::Profanity;
  return std::nullopt;
}

std::string literal_pattern(std::string_view literal) {
  std::string out = "(?<![A-Za-z0-9_])";
  for (const char c : literal) {
    switch (c) {
      case '\\': case '^': case '$': case '.': case '|': case '?': case '*':
      case '+': case '(': case ')': case '[': case ']': case '{': case '}':
      case '#': case ' ': case '-':
        out.push_back('\\');
        out.push_back(c);
        break;
      default:
        out.push_back(c);
    }
  }
  out += "(?![A-Za-z0-9_])";
  return out;
}

CompiledMatcher::CompiledMatcher() = default;
CompiledMatcher::~CompiledMatcher() = default;
CompiledMatcher::CompiledMatcher(const CompiledMatcher&) = default;
CompiledMatcher& CompiledMatcher::operator=(const CompiledMatcher&) = default;
CompiledMatcher::CompiledMatcher(CompiledMatcher&&) noexcept = default;
CompiledMatcher& CompiledMatcher::operator=(CompiledMatcher&&) noexcept = default;

CompiledMatcher CompiledMatcher::compile(std::vector<MatchTerm> terms) {
  CompiledMatcher matcher;
  auto impl = std::make_shared<Impl>();
  std::string raw;
  std::size_t next_group = 1;
  std::set<std::size_t> lengths;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& term = terms[i];
    if (term.pattern.empty()) {
      throw ParseError("match term " + std::to_string(i) + " is empty");
    }
    if (!term.is_raw_regex) {
      impl->literal_term.emplace(ascii_lower(term.pattern), i);  // earliest index wins
      lengths.insert(term.pattern.size());
      continue;
    }
    std::size_t inner_groups = 0;
    try {
      inner_groups = boost::regex(term.pattern, kFlags).mark_count();
    } catch (const boost::regex_error& e) {
      throw ParseError("invalid regex in term '" + term.pattern + "': " + e.what());
    }
    if (!raw.empty()) raw.push_back('|');
    raw += '(';
    raw += term.pattern;
    raw += ')';
    impl->raw_term.push_back(i);
    impl->raw_group.push_back(next_group);
    next_group += 1 + inner_groups;
  }
  impl->literal_lengths.assign(lengths.begin(), lengths.end());
  if (!raw.empty()) {
    try {
      impl->raw = boost::regex(raw, kFlags);
    } catch (const boost::regex_error& e) {
      throw ParseError(std::string("cannot compile term list: ") + e.what());
    }
  }
  if (!terms.empty()) matcher.impl_ = std::move(impl);
  matcher.terms_ = std::move(terms);
  return matcher;
}

namespace {

struct Candidate {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t term = 0;
};

}  // namespace

std::vector<MatchHit> CompiledMatcher::find_all(std::string_view text) const {
  std::vector<MatchHit> hits;
  if (!impl_ || text.empty()) return hits;
  const Impl& impl = *impl_;
  const std::string lower = ascii_lower(text);
  const std::string_view folded = lower;
  const std::size_t n = text.size();

  auto literal_at = [&](std::size_t p) -> std::optional<Candidate> {
    if (impl.literal_term.empty() || (p > 0 && is_word_byte(text[p - 1]))) return std::nullopt;
    std::optional<Candidate> best;
    for (const auto len : impl.literal_lengths) {
      if (p + len > n) break;
      if (p + len < n && is_word_byte(text[p + len])) continue;
      const auto it = impl.literal_term.find(folded.substr(p, len));
      if (it != impl.literal_term.end() && (!best || it->second < best->term)) {
        best = Candidate{p, p + len, it->second};
      }
    }
    return best;
  };

  const char* const first = text.data();
  const char* const last = first + n;
  auto raw_from = [&](std::size_t p) -> std::optional<Candidate> {
    if (impl.raw_term.empty()) return std::nullopt;
    boost::cmatch m;
    auto flags = boost::match_default | boost::match_not_null;
    if (p > 0) flags |= boost::match_prev_avail;
    if (!boost::regex_search(first + p, last, m, impl.raw, flags, first)) return std::nullopt;
    Candidate c{static_cast<std::size_t>(m[0].first - first),
                static_cast<std::size_t>(m[0].second - first), 0};
    for (std::size_t a = 0; a < impl.raw_term.size(); ++a) {
      if (m[static_cast<int>(impl.raw_group[a])].matched) {
        c.term = impl.raw_term[a];
        break;
      }
    }
    return c;
  };

  std::size_t pos = 0;
  std::optional<Candidate> raw = raw_from(0);
  while (pos < n) {
    if (raw && raw->start < pos) raw = raw_from(pos);
    const std::size_t limit = raw ? raw->start : n - 1;
    std::optional<Candidate> lit;
    for (std::size_t p = pos; p <= limit && p < n && !lit; ++p) lit = literal_at(p);

    Candidate chosen;
    if (lit && (!raw || lit->start < raw->start || lit->term < raw->term)) {
      chosen = *lit;
    } else if (raw) {
      chosen = *raw;
    } else {
      break;
    }
    hits.push_back({terms_[chosen.term], chosen.start, chosen.end,
                    make_excerpt(text, chosen.start, chosen.end)});
    pos = chosen.end;
  }
  return hits;
}

std::string make_excerpt(std::string_view text, std::size_t start, std::size_t end) {
  const std::size_t hit_len = end - start;
  if (hit_len >= kExcerptBytes) return std::string(text.substr(start, hit_len));
  const std::size_t slack = kExcerptBytes - hit_len;
  std::size_t left = start >= slack / 2 ? start - slack / 2 : 0;
  std::size_t right = std::min(text.size(), end + (slack - (start - left)));
  // Give unused right-hand slack back to the left side.
  if (right - left < kExcerptBytes) left = right >= kExcerptBytes ? right - kExcerptBytes : 0;
  while (left < start && is_continuation(text[left])) ++left;
  while (right > end && right < text.size() && is_continuation(text[right])) --right;
  return std::string(text.substr(left, right - left));
}

std::vector<MatchTerm> load_word_list(std::istream& in, MatchSource source) {
  std::vector<MatchTerm> terms;
  std::string line;
  while (std::getline(in, line)) {
    const auto word = trim(line);
    if (word.empty()) continue;
    terms.push_back({ascii_lower(word), false, source});
  }
  return terms;
}

std::vector<MatchTerm> load_word_list_file(const std::filesystem::path& path, MatchSource source) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open word list " + path.string());
  return load_word_list(in, source);
}

}  // namespace detox

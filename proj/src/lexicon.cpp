#include "detox/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>

#include "detox/errors.hpp"
#include "detox/text_util.hpp"

namespace detox {

namespace {

struct CodePoint {
  char32_t value;
  std::size_t length;
};

CodePoint decode_at(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (i + len > s.size()) return {0xFFFD, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

bool is_word_codepoint(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
  }
  if (cp == 0xFFFD) return false;
  // Latin-1 punctuation/symbols and the General Punctuation block.
  if (cp >= 0x80 && cp <= 0xBF) return false;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return false;
  if (cp >= 0x2190 && cp <= 0x2BFF) return false;  // arrows, math, box drawing
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp >= 0x1F000) return false;                 // emoji and pictographs
  return true;
}

bool is_joiner(char32_t cp) { return cp == '\'' || cp == '-' || cp == 0x2019; }

void append_lower(std::string& out, std::string_view s, std::size_t i, CodePoint cp) {
  if (cp.value < 0x80) {
    out.push_back(static_cast<char>(ascii_lower(static_cast<char>(cp.value))));
  } else if (cp.value >= 0xC0 && cp.value <= 0xDE && cp.value != 0xD7) {
    // Latin-1 uppercase -> lowercase is +0x20; both encode in two bytes.
    const char32_t lower = cp.value + 0x20;
    out.push_back(static_cast<char>(0xC0 | (lower >> 6)));
    out.push_back(static_cast<char>(0x80 | (lower & 0x3F)));
  } else {
    out.append(s.substr(i, cp.length));
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  // Joiner seen after a word character, not yet confirmed by a following one.
  std::string pending;

  std::size_t i = 0;
  while (i < text.size()) {
    const CodePoint cp = decode_at(text, i);
    if (is_word_codepoint(cp.value)) {
      if (!pending.empty()) {
        current += pending;
        pending.clear();
      }
      append_lower(current, text, i, cp);
    } else if (is_joiner(cp.value) && !current.empty() && pending.empty()) {
      pending = cp.value == '-' ? "-" : "'";
    } else {
      pending.clear();
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    }
    i += cp.length;
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string normalize_term(std::string_view term) {
  std::string out;
  for (const auto& token : tokenize(term)) {
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

std::string_view to_string(Bucket bucket) {
  switch (bucket) {
    case Bucket::StronglyNegative:
      return "strongly_negative";
    case Bucket::Negative:
      return "negative";
    case Bucket::Neutral:
      return "neutral";
    case Bucket::Positive:
      return "positive";
    case Bucket::StronglyPositive:
      return "strongly_positive";
  }
  return "neutral";
}

std::optional<Bucket> bucket_from_string(std::string_view name) {
  for (auto b : {Bucket::StronglyNegative, Bucket::Negative, Bucket::Neutral, Bucket::Positive,
                 Bucket::StronglyPositive}) {
    if (to_string(b) == name) return b;
  }
  return std::nullopt;
}

Bucket bucket_of(int sum) {
  if (sum <= -4) return Bucket::StronglyNegative;
  if (sum < 0) return Bucket::Negative;
  if (sum == 0) return Bucket::Neutral;
  if (sum < 4) return Bucket::Positive;
  return Bucket::StronglyPositive;
}

void Lexicon::insert(std::string term, int score) {
  if (term.empty() || normalize_term(term) != term) {
    throw ParseError("lexicon term is not canonical: '" + term + "'");
  }
  if (score < kMinScore || score > kMaxScore) {
    throw RangeError("score " + std::to_string(score) + " for '" + term + "' outside [-5, 5]");
  }
  const int len = static_cast<int>(std::count(term.begin(), term.end(), ' ')) + 1;
  entries_.insert_or_assign(std::move(term), score);
  max_phrase_len_ = std::max(max_phrase_len_, len);
}

std::optional<int> Lexicon::find(std::string_view term) const {
  const auto it = entries_.find(term);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Lexicon Lexicon::load(std::istream& in) {
  Lexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto where = "lexicon line " + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(where + ": expected exactly one tab");
    }
    const std::string_view score_text = std::string_view(line).substr(tab + 1);
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(score_text.data(), score_text.data() + score_text.size(), value);
    if (ec != std::errc{} || ptr != score_text.data() + score_text.size() || score_text.empty()) {
      throw ParseError(where + ": score is not an integer");
    }
    try {
      lexicon.insert(line.substr(0, tab), value);
    } catch (const RangeError& e) {
      throw RangeError(where + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return lexicon;
}

Lexicon Lexicon::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open lexicon file " + path.string());
  return load(in);
}

SentimentReport score(std::string_view text, const Lexicon& lexicon,
                      std::span<const PolarityOverride> overrides, int threshold) {
  TermScores override_map;
  int max_len = lexicon.max_phrase_len();
  for (const auto& o : overrides) {
    override_map.insert_or_assign(o.term, o.score);
    max_len = std::max(max_len, static_cast<int>(std::count(o.term.begin(), o.term.end(), ' ')) + 1);
  }

  const auto tokens = tokenize(text);
  SentimentReport report;
  report.token_count = tokens.size();
  report.threshold = threshold;

  std::size_t i = 0;
  std::string phrase;
  while (i < tokens.size()) {
    const std::size_t longest = std::min<std::size_t>(max_len, tokens.size() - i);
    std::size_t consumed = 0;
    for (std::size_t len = longest; len >= 1 && consumed == 0; --len) {
      phrase = tokens[i];
      for (std::size_t k = 1; k < len; ++k) {
        phrase.push_back(' ');
        phrase += tokens[i + k];
      }
      std::optional<int> value;
      if (const auto it = override_map.find(phrase); it != override_map.end()) {
        value = it->second;
      } else {
        value = lexicon.find(phrase);
      }
      if (value) {
        report.matches.push_back({phrase, *value, i});
        report.sum += *value;
        consumed = len;
      }
    }
    i += consumed == 0 ? 1 : consumed;
  }

  report.bucket = bucket_of(report.sum);
  report.flagged = report.sum < threshold;
  return report;
}

}  // namespace detox

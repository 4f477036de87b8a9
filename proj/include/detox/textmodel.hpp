#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "detox/text_util.hpp"

namespace detox {

inline constexpr std::size_t kDefaultClassCap = 50;
inline constexpr double kDefaultAlpha = 1.0;
inline constexpr std::size_t kDefaultKeywordCount = 5;

struct TrainingRow {
  std::string category;
  std::string text;
};

struct TrainingCorpus {
  std::vector<TrainingRow> rows;
  std::size_t class_cap = kDefaultClassCap;
  /// Kept categories, most frequent first (ties by name).
  std::vector<std::string> categories;
  /// Rows discarded because their category fell outside the cap.
  std::size_t dropped_rows = 0;
  /// Records without the required fields or with an empty category.
  std::size_t skipped_rows = 0;
};

/// Reads one RFC 4180 record (quoted fields, doubled quotes, CRLF or LF).
/// Returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields);

/// Reads a headline CSV with `headline_category` and `headline_text`
/// columns (others ignored) and keeps only rows whose category is among the
/// `class_cap` most frequent. Categories are trimmed and lowercased.
/// Throws ParseError on a missing column or when no usable rows remain.
TrainingCorpus ingest_csv(std::istream& in, std::size_t class_cap = kDefaultClassCap);
TrainingCorpus ingest_csv_file(const std::filesystem::path& path,
                               std::size_t class_cap = kDefaultClassCap);

struct Prediction {
  std::string category;
  double log_posterior = 0.0;
  std::string runner_up;  // empty for single-class models
  double margin = 0.0;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Multinomial naive Bayes over lexicon tokens with additive smoothing.
/// Classes and vocabulary are held in lexicographic order, so the model is
/// independent of training-row order.
class ClassifierModel {
 public:
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocab_tokens_; }
  std::size_t vocab_size() const noexcept { return vocab_tokens_.size(); }
  double alpha() const noexcept { return alpha_; }

  const std::vector<double>& log_priors() const noexcept { return log_priors_; }
  std::uint64_t doc_count(std::size_t cls) const { return doc_counts_.at(cls); }
  std::uint64_t token_total(std::size_t cls) const { return token_totals_.at(cls); }
  std::uint64_t token_count(std::size_t cls, std::size_t token) const {
    return counts_.at(cls * vocab_size() + token);
  }

  /// log P(token | class) for an in-vocabulary token index.
  double log_likelihood(std::size_t cls, std::size_t token) const {
    return log_likelihoods_.at(cls * vocab_size() + token);
  }
  /// log P(token | class) for tokens outside the vocabulary.
  double unseen_log_likelihood(std::size_t cls) const { return unseen_.at(cls); }

  std::optional<std::size_t> token_index(std::string_view token) const;

  /// Joint log score per class, in classes() order.
  std::vector<double> log_posteriors(std::string_view text) const;
  Prediction predict(std::string_view text) const;

  friend ClassifierModel train(const TrainingCorpus& corpus, double alpha);
  friend void save_model(const ClassifierModel& model, std::ostream& out);
  friend ClassifierModel load_model(std::istream& in);

 private:
  void finalize();

  std::vector<std::string> classes_;
  std::vector<std::string> vocab_tokens_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> vocab_;
  std::vector<std::uint64_t> doc_counts_;
  std::vector<std::uint64_t> token_totals_;
  std::vector<std::uint64_t> counts_;  // classes x vocab, row-major
  double alpha_ = kDefaultAlpha;

  std::vector<double> log_priors_;
  std::vector<double> log_likelihoods_;  // classes x vocab, row-major
  std::vector<double> unseen_;
};

/// Throws ParameterError when alpha <= 0 (or not finite), ParseError when
/// the corpus is empty or yields no tokens at all.
ClassifierModel train(const TrainingCorpus& corpus, double alpha = kDefaultAlpha);

inline constexpr std::string_view kModelMagic = "DETOX-MNB";
inline constexpr int kModelFormatVersion = 1;

/// Text format: magic line, format version, alpha as a hex float, then the
/// vocabulary and per-class sparse counts, ending in an `end` line.
/// Likelihoods are recomputed on load, bit-identically.
void save_model(const ClassifierModel& model, std::ostream& out);
void save_model_file(const ClassifierModel& model, const std::filesystem::path& path);
/// Throws ParseError on corrupt or truncated input or an unknown version.
ClassifierModel load_model(std::istream& in);
ClassifierModel load_model_file(const std::filesystem::path& path);

using StopwordSet = std::unordered_set<std::string, StringHash, std::equal_to<>>;

StopwordSet load_stopwords(std::istream& in);
StopwordSet load_stopwords_file(const std::filesystem::path& path);

struct KeywordTag {
  std::string token;
  std::size_t count = 0;

  friend bool operator==(const KeywordTag&, const KeywordTag&) = default;
};

struct KeywordTags {
  std::vector<KeywordTag> tags;
  std::size_t k = kDefaultKeywordCount;

  friend bool operator==(const KeywordTags&, const KeywordTags&) = default;
};

/// Term-frequency tags: tokens that are not stopwords and are at least three
/// characters long, top k by (count desc, token asc). Throws ParameterError
/// when k == 0.
KeywordTags extract_keywords(std::string_view text, const StopwordSet& stopwords,
                             std::size_t k = kDefaultKeywordCount);

}  // namespace detox

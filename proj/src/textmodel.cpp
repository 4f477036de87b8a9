#include "detox/textmodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "detox/errors.hpp"
#include "detox/lexicon.hpp"

namespace detox {

bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  char c = 0;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n') {
      break;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get(c);
      break;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  fields.push_back(std::move(field));
  return true;
}

TrainingCorpus ingest_csv(std::istream& in, std::size_t class_cap) {
  if (class_cap == 0) throw ParameterError("class cap must be at least 1");
  std::vector<std::string> fields;
  if (!read_csv_record(in, fields)) throw ParseError("CSV is empty; expected a header row");
  if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);

  auto column = [&](std::string_view name) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (trim(fields[i]) == name) return i;
    }
    throw ParseError("CSV is missing column '" + std::string(name) + "'");
  };
  const std::size_t category_col = column("headline_category");
  const std::size_t text_col = column("headline_text");
  const std::size_t needed = std::max(category_col, text_col) + 1;

  TrainingCorpus corpus;
  corpus.class_cap = class_cap;
  std::vector<TrainingRow> all;
  std::map<std::string, std::size_t> frequency;
  while (read_csv_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() < needed) {
      ++corpus.skipped_rows;
      continue;
    }
    std::string category = ascii_lower(trim(fields[category_col]));
    if (category.empty()) {
      ++corpus.skipped_rows;
      continue;
    }
    ++frequency[category];
    all.push_back({std::move(category), std::move(fields[text_col])});
  }
  if (all.empty()) throw ParseError("CSV contains no usable rows");

  std::vector<std::pair<std::string, std::size_t>> ranked(frequency.begin(), frequency.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > class_cap) ranked.resize(class_cap);
  for (const auto& [name, count] : ranked) corpus.categories.push_back(name);

  std::unordered_set<std::string_view> kept(corpus.categories.begin(), corpus.categories.end());
  for (auto& row : all) {
    if (kept.contains(row.category)) {
      corpus.rows.push_back(std::move(row));
    } else {
      ++corpus.dropped_rows;
    }
  }
  return corpus;
}

TrainingCorpus ingest_csv_file(const std::filesystem::path& path, std::size_t class_cap) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open CSV " + path.string());
  return ingest_csv(in, class_cap);
}

std::optional<std::size_t> ClassifierModel::token_index(std::string_view token) const {
  const auto it = vocab_.find(token);
  if (it == vocab_.end()) return std::nullopt;
  return it->second;
}

void ClassifierModel::finalize() {
  const std::size_t n_classes = classes_.size();
  const std::size_t v = vocab_tokens_.size();
  vocab_.clear();
  for (std::size_t i = 0; i < v; ++i) vocab_.emplace(vocab_tokens_[i], i);

  std::uint64_t total_docs = 0;
  for (const auto d : doc_counts_) total_docs += d;

  log_priors_.assign(n_classes, 0.0);
  unseen_.assign(n_classes, 0.0);
  log_likelihoods_.assign(n_classes * v, 0.0);
  const double av = alpha_ * static_cast<double>(v);
  for (std::size_t c = 0; c < n_classes; ++c) {
    log_priors_[c] =
        std::log(static_cast<double>(doc_counts_[c]) / static_cast<double>(total_docs));
    const double denom = static_cast<double>(token_totals_[c]) + av;
    unseen_[c] = std::log(alpha_ / denom);
    for (std::size_t t = 0; t < v; ++t) {
      log_likelihoods_[c * v + t] =
          std::log((static_cast<double>(counts_[c * v + t]) + alpha_) / denom);
    }
  }
}

std::vector<double> ClassifierModel::log_posteriors(std::string_view text) const {
  const auto tokens = tokenize(text);
  std::vector<std::optional<std::size_t>> ids;
  ids.reserve(tokens.size());
  for (const auto& tok : tokens) ids.push_back(token_index(tok));

  const std::size_t v = vocab_size();
  std::vector<double> scores(classes_.size());
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    double s = log_priors_[c];
    for (const auto& id : ids) s += id ? log_likelihoods_[c * v + *id] : unseen_[c];
    scores[c] = s;
  }
  return scores;
}

Prediction ClassifierModel::predict(std::string_view text) const {
  const auto scores = log_posteriors(text);
  Prediction p;
  if (scores.empty()) return p;
  // Classes are sorted, so the first maximum is the lexicographically
  // smallest among ties.
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  p.category = classes_[best];
  p.log_posterior = scores[best];
  std::optional<std::size_t> second;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    if (c == best) continue;
    if (!second || scores[c] > scores[*second]) second = c;
  }
  if (second) {
    p.runner_up = classes_[*second];
    p.margin = scores[best] - scores[*second];
  }
  return p;
}

ClassifierModel train(const TrainingCorpus& corpus, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ParameterError("alpha must be a positive finite number");
  }
  if (corpus.rows.empty()) throw ParseError("training corpus is empty");

  std::map<std::string, std::size_t> class_ids;
  std::map<std::string, std::size_t> vocab_ids;
  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(corpus.rows.size());
  for (const auto& row : corpus.rows) {
    class_ids.emplace(row.category, 0);
    tokenized.push_back(tokenize(row.text));
    for (const auto& t : tokenized.back()) vocab_ids.emplace(t, 0);
  }

  ClassifierModel model;
  model.alpha_ = alpha;
  for (auto& [name, id] : class_ids) {
    id = model.classes_.size();
    model.classes_.push_back(name);
  }
  for (auto& [tok, id] : vocab_ids) {
    id = model.vocab_tokens_.size();
    model.vocab_tokens_.push_back(tok);
  }

  const std::size_t v = model.vocab_tokens_.size();
  if (v == 0) throw ParseError("training corpus contains no tokens");
  model.doc_counts_.assign(model.classes_.size(), 0);
  model.token_totals_.assign(model.classes_.size(), 0);
  model.counts_.assign(model.classes_.size() * v, 0);
  for (std::size_t r = 0; r < corpus.rows.size(); ++r) {
    const std::size_t c = class_ids.at(corpus.rows[r].category);
    ++model.doc_counts_[c];
    for (const auto& t : tokenized[r]) {
      ++model.counts_[c * v + vocab_ids.at(t)];
      ++model.token_totals_[c];
    }
  }
  model.finalize();
  return model;
}

void save_model(const ClassifierModel& model, std::ostream& out) {
  const std::size_t v = model.vocab_size();
  out << kModelMagic << '\n' << "format " << kModelFormatVersion << '\n';
  out << "alpha " << std::hexfloat << model.alpha_ << std::defaultfloat << '\n';
  out << "vocab " << v << '\n';
  for (const auto& tok : model.vocab_tokens_) out << tok << '\n';
  out << "classes " << model.classes_.size() << '\n';
  for (std::size_t c = 0; c < model.classes_.size(); ++c) {
    std::size_t nnz = 0;
    for (std::size_t t = 0; t < v; ++t) nnz += model.counts_[c * v + t] != 0 ? 1 : 0;
    out << model.doc_counts_[c] << ' ' << model.token_totals_[c] << ' ' << nnz << ' '
        << model.classes_[c] << '\n';
    bool first = true;
    for (std::size_t t = 0; t < v; ++t) {
      const auto count = model.counts_[c * v + t];
      if (count == 0) continue;
      if (!first) out << ' ';
      out << t << ':' << count;
      first = false;
    }
    out << '\n';
  }
  out << "end\n";
  if (!out) throw Error("failed to write model");
}

void save_model_file(const ClassifierModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_model(model, out);
}

namespace {

std::string expect_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(std::string("model file truncated while reading ") + what);
  }
  return line;
}

template <typename T>
T keyed_value(const std::string& line, std::string_view key) {
  std::istringstream ss(line);
  std::string k;
  T value{};
  if (!(ss >> k) || k != key || !(ss >> value)) {
    throw ParseError("model file: expected '" + std::string(key) + "' line, got '" + line + "'");
  }
  return value;
}

std::uint64_t count_value(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("model file: bad count cell '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

ClassifierModel load_model(std::istream& in) {
  if (expect_line(in, "magic") != kModelMagic) throw ParseError("not a detox model file");
  const auto version = keyed_value<int>(expect_line(in, "format"), "format");
  if (version != kModelFormatVersion) {
    throw ParseError("unsupported model format version " + std::to_string(version) +
                     " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
  }

  ClassifierModel model;
  {
    const auto line = expect_line(in, "alpha");
    if (!line.starts_with("alpha ")) throw ParseError("model file: expected alpha line");
    char* end = nullptr;
    model.alpha_ = std::strtod(line.c_str() + 6, &end);
    if (end == line.c_str() + 6 || !(model.alpha_ > 0.0)) {
      throw ParseError("model file: invalid alpha");
    }
  }

  const auto v = keyed_value<std::size_t>(expect_line(in, "vocab"), "vocab");
  if (v == 0) throw ParseError("model file: empty vocabulary");
  model.vocab_tokens_.reserve(v);
  for (std::size_t i = 0; i < v; ++i) {
    auto tok = expect_line(in, "vocabulary");
    if (tok.empty() || (i > 0 && !(model.vocab_tokens_.back() < tok))) {
      throw ParseError("model file: vocabulary is not strictly sorted at entry " +
                       std::to_string(i));
    }
    model.vocab_tokens_.push_back(std::move(tok));
  }

  const auto n_classes = keyed_value<std::size_t>(expect_line(in, "classes"), "classes");
  if (n_classes == 0) throw ParseError("model file: no classes");
  model.counts_.assign(n_classes * v, 0);
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::istringstream header(expect_line(in, "class header"));
    std::uint64_t docs = 0;
    std::uint64_t total = 0;
    std::size_t nnz = 0;
    if (!(header >> docs >> total >> nnz)) throw ParseError("model file: bad class header");
    header >> std::ws;
    std::string name;
    std::getline(header, name);
    if (name.empty() || docs == 0) throw ParseError("model file: bad class header");
    if (c > 0 && !(model.classes_.back() < name)) {
      throw ParseError("model file: classes are not strictly sorted");
    }
    model.classes_.push_back(name);
    model.doc_counts_.push_back(docs);
    model.token_totals_.push_back(total);

    std::istringstream row(expect_line(in, "class counts"));
    std::uint64_t sum = 0;
    std::string cell;
    std::size_t seen = 0;
    while (row >> cell) {
      const auto colon = cell.find(':');
      if (colon == std::string::npos) throw ParseError("model file: bad count cell");
      const auto idx = count_value(std::string_view(cell).substr(0, colon));
      const auto count = count_value(std::string_view(cell).substr(colon + 1));
      if (idx >= v || count == 0) throw ParseError("model file: count cell out of range");
      model.counts_[c * v + idx] = count;
      sum += count;
      ++seen;
    }
    if (seen != nnz || sum != total) {
      throw ParseError("model file: counts for class '" + name + "' are inconsistent");
    }
  }
  if (expect_line(in, "trailer") != "end") throw ParseError("model file: missing end marker");
  model.finalize();
  return model;
}

ClassifierModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open model " + path.string());
  return load_model(in);
}

StopwordSet load_stopwords(std::istream& in) {
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    const auto w = trim(line);
    if (!w.empty()) words.insert(ascii_lower(w));
  }
  return words;
}

StopwordSet load_stopwords_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open stopword list " + path.string());
  return load_stopwords(in);
}

KeywordTags extract_keywords(std::string_view text, const StopwordSet& stopwords, std::size_t k) {
  if (k == 0) throw ParameterError("k must be at least 1");
  auto codepoints = [](std::string_view s) {
    return static_cast<std::size_t>(std::count_if(
        s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
  };
  std::map<std::string, std::size_t> counts;
  for (auto& tok : tokenize(text)) {
    if (codepoints(tok) < 3 || stopwords.contains(tok)) continue;
    ++counts[std::move(tok)];
  }
  KeywordTags tags;
  tags.k = k;
  for (auto& [tok, n] : counts) tags.tags.push_back({tok, n});
  // counts is already in token order, so a stable sort by count keeps the
  // lexicographic tie-break.
  std::stable_sort(tags.tags.begin(), tags.tags.end(),
                   [](const KeywordTag& a, const KeywordTag& b) { return a.count > b.count; });
  if (tags.tags.size() > k) tags.tags.resize(k);
  return tags;
}

}  // namespace detox

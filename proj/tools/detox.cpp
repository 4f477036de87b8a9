// detox: batch scoring, training, filtering and scanning, plus `serve`.
//
// Exit codes: 0 success, 1 operational error (bad input data), 2 usage error.

#include <CLI11.hpp>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <sstream>

#include "detox/errors.hpp"
#include "detox/json_io.hpp"
#include "detox/service.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitOperational = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path data_dir() {
  if (const char* env = std::getenv("DETOX_DATA_DIR")) return env;
  return DETOX_DATA_DIR;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw detox::NotFoundError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size()))) {
    throw detox::Error("cannot write " + path.string());
  }
}

/// Text from exactly one of --text / --stdin.
struct TextInput {
  std::optional<std::string> text;
  bool from_stdin = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--text", text, "Input text");
    cmd.add_flag("--stdin", from_stdin, "Read input text from standard input");
  }

  std::string get() const {
    if (text.has_value() == from_stdin) throw UsageError("give exactly one of --text or --stdin");
    if (text) return *text;
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
};

detox::UserProfile profile_or_default(const std::string& path) {
  if (path.empty()) return {};
  return detox::load_profile_file(path);
}

void print(const json& doc) { std::cout << doc.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentiment and blacklist content filter for search-result pages"};
  app.require_subcommand(1);
  const auto data = data_dir();

  std::string lexicon_path = (data / "AFINN-111.txt").string();
  std::string profanity_path = (data / "profanity.txt").string();
  std::string stopwords_path = (data / "stopwords.txt").string();
  std::string profile_path;
  std::string model_path;

  // score
  auto* score_cmd = app.add_subcommand("score", "Lexicon sentiment report for a text");
  TextInput score_in;
  score_in.add_to(*score_cmd);
  score_cmd->add_option("--profile", profile_path, "Profile JSON (overrides, sensitivity)");
  score_cmd->add_option("--lexicon", lexicon_path, "Lexicon file")->capture_default_str();

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "Predict a headline category");
  TextInput classify_in;
  classify_in.add_to(*classify_cmd);
  classify_cmd->add_option("--model", model_path, "Model file written by `train`")->required();

  // keywords
  auto* keywords_cmd = app.add_subcommand("keywords", "Term-frequency keyword tags");
  TextInput keywords_in;
  keywords_in.add_to(*keywords_cmd);
  std::size_t keyword_k = detox::kDefaultKeywordCount;
  keywords_cmd->add_option("-k,--k", keyword_k, "Number of tags")->capture_default_str();
  keywords_cmd->add_option("--stopwords", stopwords_path, "Stopword list")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the category classifier from a CSV");
  std::string csv_path;
  std::string out_model;
  std::size_t top = detox::kDefaultClassCap;
  double alpha = detox::kDefaultAlpha;
  train_cmd->add_option("--csv", csv_path, "Headline CSV")->required();
  train_cmd->add_option("--top", top, "Keep the K most frequent categories")->capture_default_str();
  train_cmd->add_option("--alpha", alpha, "Additive smoothing constant")->capture_default_str();
  train_cmd->add_option("--out", out_model, "Model output path")->required();

  // filter
  auto* filter_cmd = app.add_subcommand("filter", "Filter an HTML page");
  std::string in_html;
  std::string patterns_path;
  std::string mode_name = "search";
  std::string out_html;
  std::string decisions_path;
  bool deep_all = false;
  filter_cmd->add_option("--in", in_html, "Input HTML")->required();
  filter_cmd->add_option("--patterns", patterns_path, "Pattern config JSON")->required();
  filter_cmd->add_option("--profile", profile_path, "Profile JSON (default profile if omitted)");
  filter_cmd->add_option("--mode", mode_name, "search or page")
      ->check(CLI::IsMember({"search", "page"}))
      ->capture_default_str();
  filter_cmd->add_option("--out", out_html, "Rewritten HTML output")->required();
  filter_cmd->add_option("--decisions", decisions_path, "Write decisions JSON here");
  filter_cmd->add_option("--model", model_path, "Classifier model for flagged items");
  filter_cmd->add_option("--lexicon", lexicon_path, "Lexicon file")->capture_default_str();
  filter_cmd->add_option("--profanity", profanity_path, "Profanity list")->capture_default_str();
  filter_cmd->add_option("--stopwords", stopwords_path, "Stopword list")->capture_default_str();
  filter_cmd->add_flag("--deep-all", deep_all, "Classify and tag every item, not only flagged ones");

  // scan
  auto* scan_cmd = app.add_subcommand("scan", "Blacklist scan of an arbitrary page");
  TextInput scan_in;
  scan_in.add_to(*scan_cmd);
  std::string scan_file;
  std::string site;
  scan_cmd->add_option("--in", scan_file, "Page file (HTML or text)");
  scan_cmd->add_option("--site", site, "Host name of the page")->required();
  scan_cmd->add_option("--profile", profile_path, "Profile JSON");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API (DETOX_* env vars honored)");
  auto config = detox::ServiceConfig::with_data_dir(data);
  std::optional<std::string> serve_host;
  std::optional<int> serve_port;
  std::optional<std::string> serve_model, serve_profile, serve_patterns, serve_static;
  serve_cmd->add_option("--host", serve_host, "Bind address");
  serve_cmd->add_option("--port", serve_port, "Port");
  serve_cmd->add_option("--model", serve_model, "Classifier model");
  serve_cmd->add_option("--profile", serve_profile, "Profile store path");
  serve_cmd->add_option("--patterns-dir", serve_patterns, "Directory of pattern configs");
  serve_cmd->add_option("--static-dir", serve_static, "Static files served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*score_cmd) {
      const auto text = score_in.get();
      const auto lexicon = detox::Lexicon::load_file(lexicon_path);
      const auto profile = profile_or_default(profile_path);
      print(detox::to_json(detox::score(text, lexicon, profile.overrides, profile.sensitivity)));
    } else if (*classify_cmd) {
      const auto text = classify_in.get();
      const auto model = detox::load_model_file(model_path);
      print(detox::to_json(model.predict(text)));
    } else if (*keywords_cmd) {
      const auto text = keywords_in.get();
      if (keyword_k == 0) throw UsageError("-k must be at least 1");
      const auto stopwords = detox::load_stopwords_file(stopwords_path);
      print(detox::to_json(detox::extract_keywords(text, stopwords, keyword_k)));
    } else if (*train_cmd) {
      if (!(alpha > 0.0)) throw UsageError("--alpha must be positive");
      if (top == 0) throw UsageError("--top must be at least 1");
      const auto corpus = detox::ingest_csv_file(csv_path, top);
      const auto model = detox::train(corpus, alpha);
      detox::save_model_file(model, out_model);
      print({{"classes", model.classes()},
             {"rows_used", corpus.rows.size()},
             {"rows_dropped", corpus.dropped_rows},
             {"rows_skipped", corpus.skipped_rows},
             {"vocab_size", model.vocab_size()},
             {"model", out_model}});
    } else if (*filter_cmd) {
      const auto patterns = detox::load_patterns_file(patterns_path);
      const auto profile = profile_or_default(profile_path);
      const auto lexicon = detox::Lexicon::load_file(lexicon_path);
      const auto stopwords = detox::load_stopwords_file(stopwords_path);
      const auto profanity = detox::CompiledMatcher::compile(
          detox::load_word_list_file(profanity_path, detox::MatchSource::Profanity));
      std::optional<detox::ClassifierModel> model;
      if (!model_path.empty()) model = detox::load_model_file(model_path);

      detox::Engine engine;
      engine.lexicon = &lexicon;
      engine.stopwords = &stopwords;
      engine.profanity = &profanity;
      engine.model = model ? &*model : nullptr;
      engine.deep_analysis_all = deep_all;

      const auto result = detox::filter_document(read_file(in_html), patterns, profile, engine,
                                                 *detox::mode_from_string(mode_name));
      write_file(out_html, result.html);
      if (!decisions_path.empty()) {
        json decisions = json::array();
        for (const auto& d : result.decisions) decisions.push_back(detox::to_json(d));
        write_file(decisions_path, decisions.dump(2) + "\n");
      }
      if (result.health.status == detox::HealthStatus::Degraded) {
        std::cerr << "warning: page has " << result.health.anchor_count
                  << " links but no pattern rule matched; the patterns for site '"
                  << patterns.site_id << "' may be out of date\n";
      }
      print(detox::to_json(result.health));
    } else if (*scan_cmd) {
      std::string content;
      if (!scan_file.empty()) {
        if (scan_in.text || scan_in.from_stdin) throw UsageError("give only one input source");
        content = read_file(scan_file);
      } else {
        content = scan_in.get();
      }
      print(detox::to_json(detox::scan_page(content, site, profile_or_default(profile_path))));
    } else if (*serve_cmd) {
      config.apply_env();
      if (serve_host) config.bind_address = *serve_host;
      if (serve_port) config.port = *serve_port;
      if (serve_model) config.model_path = *serve_model;
      if (serve_profile) config.profile_path = *serve_profile;
      if (serve_patterns) config.patterns_dir = *serve_patterns;
      if (serve_static) config.static_dir = *serve_static;
      detox::Service service(config);
      const int port = service.bind();
      if (port < 0) throw detox::Error("cannot bind " + config.bind_address);
      std::cerr << "detox: listening on http://" << config.bind_address << ':' << port << '\n';
      return service.listen() ? kExitOk : kExitOperational;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const detox::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOperational;
  }
  return kExitOk;
}

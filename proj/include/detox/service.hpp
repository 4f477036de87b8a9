#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "detox/extraction.hpp"
#include "detox/lexicon.hpp"
#include "detox/matchlist.hpp"
#include "detox/pipeline.hpp"
#include "detox/profile.hpp"
#include "detox/textmodel.hpp"

namespace detox {

inline constexpr std::size_t kDefaultMaxBodyBytes = 5 * 1024 * 1024;

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  /// Optional; empty means the classifier endpoints answer 503.
  std::filesystem::path model_path;
  std::filesystem::path lexicon_path;
  std::filesystem::path profanity_path;
  std::filesystem::path stopwords_path;
  /// Every *.json file here is loaded as a pattern set keyed by site_id.
  std::filesystem::path patterns_dir;
  /// Need not exist yet; its directory must.
  std::filesystem::path profile_path;
  std::string cors_origin = "*";
  std::size_t max_body_bytes = kDefaultMaxBodyBytes;
  /// Optional directory served at "/" (the playground build).
  std::filesystem::path static_dir;

  /// Paths under the shipped data directory; profile under the working dir.
  static ServiceConfig with_data_dir(const std::filesystem::path& data_dir);

  /// Overrides fields from DETOX_BIND, DETOX_PORT, DETOX_MODEL, DETOX_LEXICON,
  /// DETOX_PROFANITY, DETOX_STOPWORDS, DETOX_PATTERNS_DIR, DETOX_PROFILE,
  /// DETOX_CORS_ORIGIN, DETOX_MAX_BODY and DETOX_STATIC_DIR when set.
  void apply_env();

  /// Throws ParameterError naming the first bad field.
  void validate() const;
};

/// Data loaded once at startup and shared read-only across requests.
struct ServiceData {
  Lexicon lexicon;
  StopwordSet stopwords;
  CompiledMatcher profanity;
  std::optional<ClassifierModel> model;
  std::map<std::string, PatternSet> patterns;

  static ServiceData load(const ServiceConfig& config);
  Engine engine() const;
};

/// HTTP/1.1 JSON API over the filtering engine.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to config.port (0 picks a free port) and returns the bound port.
  int bind();
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();
  void wait_until_ready() const;

  const ServiceConfig& config() const noexcept { return config_; }
  const ServiceData& data() const noexcept { return *data_; }
  ProfileStore& profiles() noexcept { return *profiles_; }

 private:
  struct Server;
  void install_routes();

  ServiceConfig config_;
  std::unique_ptr<const ServiceData> data_;
  std::unique_ptr<ProfileStore> profiles_;
  std::unique_ptr<Server> server_;
};

}  // namespace detox

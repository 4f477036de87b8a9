#include "detox/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <mutex>

#include "detox/errors.hpp"
#include "detox/json_io.hpp"

namespace detox {

using nlohmann::json;

ServiceConfig ServiceConfig::with_data_dir(const std::filesystem::path& data_dir) {
  ServiceConfig c;
  c.lexicon_path = data_dir / "AFINN-111.txt";
  c.profanity_path = data_dir / "profanity.txt";
  c.stopwords_path = data_dir / "stopwords.txt";
  c.patterns_dir = data_dir / "patterns";
  c.profile_path = "detox-profile.json";
  return c;
}

void ServiceConfig::apply_env() {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("DETOX_BIND")) bind_address = *v;
  if (auto v = env("DETOX_PORT")) {
    try {
      port = std::stoi(*v);
    } catch (const std::exception&) {
      throw ParameterError("DETOX_PORT is not a number: " + *v);
    }
  }
  if (auto v = env("DETOX_MODEL")) model_path = *v;
  if (auto v = env("DETOX_LEXICON")) lexicon_path = *v;
  if (auto v = env("DETOX_PROFANITY")) profanity_path = *v;
  if (auto v = env("DETOX_STOPWORDS")) stopwords_path = *v;
  if (auto v = env("DETOX_PATTERNS_DIR")) patterns_dir = *v;
  if (auto v = env("DETOX_PROFILE")) profile_path = *v;
  if (auto v = env("DETOX_CORS_ORIGIN")) cors_origin = *v;
  if (auto v = env("DETOX_STATIC_DIR")) static_dir = *v;
  if (auto v = env("DETOX_MAX_BODY")) {
    try {
      max_body_bytes = std::stoull(*v);
    } catch (const std::exception&) {
      throw ParameterError("DETOX_MAX_BODY is not a number: " + *v);
    }
  }
}

void ServiceConfig::validate() const {
  namespace fs = std::filesystem;
  if (port < 0 || port > 65535) throw ParameterError("port must be in [1, 65535]");
  auto need_file = [](const fs::path& p, const char* what) {
    if (p.empty() || !fs::is_regular_file(p)) {
      throw ParameterError(std::string(what) + " not found: " + p.string());
    }
  };
  need_file(lexicon_path, "lexicon");
  need_file(profanity_path, "profanity list");
  need_file(stopwords_path, "stopword list");
  if (!model_path.empty()) need_file(model_path, "model");
  if (patterns_dir.empty() || !fs::is_directory(patterns_dir)) {
    throw ParameterError("patterns directory not found: " + patterns_dir.string());
  }
  if (profile_path.empty()) throw ParameterError("profile path is empty");
  const auto parent = profile_path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw ParameterError("profile directory not found: " + parent.string());
  }
  if (!static_dir.empty() && !fs::is_directory(static_dir)) {
    throw ParameterError("static directory not found: " + static_dir.string());
  }
  if (max_body_bytes == 0) throw ParameterError("max body size must be positive");
}

ServiceData ServiceData::load(const ServiceConfig& config) {
  ServiceData d;
  d.lexicon = Lexicon::load_file(config.lexicon_path);
  d.stopwords = load_stopwords_file(config.stopwords_path);
  d.profanity =
      CompiledMatcher::compile(load_word_list_file(config.profanity_path, MatchSource::Profanity));
  if (!config.model_path.empty()) d.model = load_model_file(config.model_path);

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(config.patterns_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto set = load_patterns_file(f);
    const auto id = set.site_id;
    if (!d.patterns.emplace(id, std::move(set)).second) {
      throw ParseError("duplicate pattern site_id '" + id + "' in " + f.string());
    }
  }
  return d;
}

Engine ServiceData::engine() const {
  Engine e;
  e.lexicon = &lexicon;
  e.stopwords = &stopwords;
  e.profanity = &profanity;
  e.model = model ? &*model : nullptr;
  return e;
}

namespace {

constexpr std::size_t kMaxSessions = 64;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

/// Parses the request body as a JSON object or answers 400.
std::optional<json> body_object(const httplib::Request& req, httplib::Response& res) {
  json doc = json::parse(req.body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    error(res, 400, "request body must be a JSON object");
    return std::nullopt;
  }
  return doc;
}

std::optional<std::string> string_field(const json& doc, const char* key,
                                        httplib::Response& res) {
  const auto it = doc.find(key);
  if (it == doc.end() || !it->is_string()) {
    error(res, 400, std::string("field '") + key + "' must be a string");
    return std::nullopt;
  }
  return it->get<std::string>();
}

}  // namespace

struct Service::Server {
  httplib::Server http;

  std::mutex sessions_mutex;
  std::uint64_t next_session = 1;
  std::map<std::uint64_t, std::map<std::size_t, std::string>> sessions;

  std::uint64_t remember(std::map<std::size_t, std::string> originals) {
    std::lock_guard lock(sessions_mutex);
    const auto id = next_session++;
    sessions.emplace(id, std::move(originals));
    while (sessions.size() > kMaxSessions) sessions.erase(sessions.begin());
    return id;
  }

  std::optional<std::string> original(std::optional<std::uint64_t> session, std::size_t item) {
    std::lock_guard lock(sessions_mutex);
    if (sessions.empty()) return std::nullopt;
    const auto it = session ? sessions.find(*session) : std::prev(sessions.end());
    if (it == sessions.end()) return std::nullopt;
    const auto o = it->second.find(item);
    if (o == it->second.end()) return std::nullopt;
    return o->second;
  }
};

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  config_.validate();
  data_ = std::make_unique<const ServiceData>(ServiceData::load(config_));
  profiles_ = std::make_unique<ProfileStore>(config_.profile_path);
  server_ = std::make_unique<Server>();
  install_routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  if (config_.port == 0) return server_->http.bind_to_any_port(config_.bind_address);
  if (!server_->http.bind_to_port(config_.bind_address, config_.port)) return -1;
  return config_.port;
}

bool Service::listen() { return server_->http.listen_after_bind(); }

void Service::stop() {
  if (server_) server_->http.stop();
}

void Service::wait_until_ready() const { server_->http.wait_until_ready(); }

void Service::install_routes() {
  auto& http = server_->http;
  http.set_payload_max_length(config_.max_body_bytes);

  const std::string origin = config_.cors_origin;
  http.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    if (origin.empty()) return;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  http.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  http.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          error(res, 500, e.what());
        } catch (...) {
          error(res, 500, "internal error");
        }
      });

  const ServiceData& data = *data_;
  ProfileStore& profiles = *profiles_;
  Server& server = *server_;

  http.Post("/v1/score", [&](const httplib::Request& req, httplib::Response& res) {
    const auto doc = body_object(req, res);
    if (!doc) return;
    const auto text = string_field(*doc, "text", res);
    if (!text) return;
    const auto profile = profiles.get();
    reply(res, 200, to_json(score(*text, data.lexicon, profile.overrides, profile.sensitivity)));
  });

  http.Post("/v1/classify", [&](const httplib::Request& req, httplib::Response& res) {
    if (!data.model) return error(res, 503, "no classifier model loaded");
    const auto doc = body_object(req, res);
    if (!doc) return;
    const auto text = string_field(*doc, "text", res);
    if (!text) return;
    reply(res, 200, to_json(data.model->predict(*text)));
  });

  http.Post("/v1/keywords", [&](const httplib::Request& req, httplib::Response& res) {
    const auto doc = body_object(req, res);
    if (!doc) return;
    const auto text = string_field(*doc, "text", res);
    if (!text) return;
    std::size_t k = kDefaultKeywordCount;
    if (const auto it = doc->find("k"); it != doc->end()) {
      if (!it->is_number_unsigned() || it->get<std::size_t>() == 0) {
        return error(res, 400, "field 'k' must be a positive integer");
      }
      k = it->get<std::size_t>();
    }
    reply(res, 200, to_json(extract_keywords(*text, data.stopwords, k)));
  });

  http.Post("/v1/filter", [&](const httplib::Request& req, httplib::Response& res) {
    const auto doc = body_object(req, res);
    if (!doc) return;
    const auto html_text = string_field(*doc, "html", res);
    if (!html_text) return;
    const auto site_id = string_field(*doc, "site_id", res);
    if (!site_id) return;
    Mode mode = Mode::SearchResults;
    if (const auto it = doc->find("mode"); it != doc->end()) {
      const auto parsed = it->is_string() ? mode_from_string(it->get<std::string>()) : std::nullopt;
      if (!parsed) return error(res, 400, "field 'mode' must be \"search\" or \"page\"");
      mode = *parsed;
    }
    const auto patterns = data.patterns.find(*site_id);
    if (patterns == data.patterns.end()) {
      return error(res, 404, "no pattern config for site_id '" + *site_id + "'");
    }
    const auto profile = profiles.get();
    auto filtered = filter_document(*html_text, patterns->second, profile, data.engine(), mode);
    json decisions = json::array();
    for (const auto& d : filtered.decisions) decisions.push_back(to_json(d));
    const auto session = server.remember(std::move(filtered.originals));
    reply(res, 200,
          {{"html", filtered.html},
           {"decisions", std::move(decisions)},
           {"health", to_json(filtered.health)},
           {"session", session}});
  });

  http.Get(R"(/v1/original/(\d+))", [&](const httplib::Request& req, httplib::Response& res) {
    std::size_t item = 0;
    std::optional<std::uint64_t> session;
    try {
      item = std::stoull(req.matches[1].str());
      if (req.has_param("session")) session = std::stoull(req.get_param_value("session"));
    } catch (const std::exception&) {
      return error(res, 400, "invalid item id or session");
    }
    const auto markup = server.original(session, item);
    if (!markup) return error(res, 404, "no original markup for item " + std::to_string(item));
    reply(res, 200, {{"item_id", item}, {"html", *markup}});
  });

  http.Post("/v1/scan", [&](const httplib::Request& req, httplib::Response& res) {
    const auto doc = body_object(req, res);
    if (!doc) return;
    const auto content = string_field(*doc, "content", res);
    if (!content) return;
    const auto site = string_field(*doc, "site", res);
    if (!site) return;
    reply(res, 200, to_json(scan_page(*content, *site, profiles.get())));
  });

  http.Get("/v1/profile", [&](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, to_json(profiles.get()));
  });

  http.Put("/v1/profile", [&](const httplib::Request& req, httplib::Response& res) {
    const auto doc = body_object(req, res);
    if (!doc) return;
    try {
      const auto stored = profiles.put(profile_from_json(*doc));
      reply(res, 200, to_json(stored));
    } catch (const ValidationError& e) {
      reply(res, 422, {{"error", e.what()}, {"fields", e.fields()}});
    } catch (const ParseError& e) {
      reply(res, 422, {{"error", e.what()}, {"fields", json::array()}});
    } catch (const ConflictError& e) {
      error(res, 409, e.what());
    }
  });

  http.Get("/v1/health", [&](const httplib::Request&, httplib::Response& res) {
    json sites = json::array();
    for (const auto& [id, set] : data.patterns) sites.push_back(id);
    reply(res, 200,
          {{"status", "ok"},
           {"model_loaded", data.model.has_value()},
           {"lexicon_terms", data.lexicon.size()},
           {"patterns", std::move(sites)}});
  });

  if (!config_.static_dir.empty()) http.set_mount_point("/", config_.static_dir.string());
}

}  // namespace detox

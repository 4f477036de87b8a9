#include "detox/profile.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "detox/errors.hpp"
#include "detox/text_util.hpp"

namespace detox {

using nlohmann::json;

namespace {

std::string normalize_host(std::string_view host) { return ascii_lower(trim(host)); }

std::size_t token_count(std::string_view term) {
  return static_cast<std::size_t>(std::count(term.begin(), term.end(), ' ')) + 1;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(where + ": unknown field '" + key + "'");
    }
  }
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

void validate(const UserProfile& p) {
  std::vector<std::string> bad;
  if (p.sensitivity < kMinScore || p.sensitivity > kMaxScore) bad.emplace_back("sensitivity");

  std::set<std::string> seen_terms;
  for (std::size_t i = 0; i < p.overrides.size(); ++i) {
    const auto& o = p.overrides[i];
    const auto at = "overrides[" + std::to_string(i) + "]";
    if (o.term.empty() || normalize_term(o.term) != o.term || token_count(o.term) > 3 ||
        !seen_terms.insert(o.term).second) {
      bad.push_back(at + ".term");
    }
    if (o.score < kMinScore || o.score > kMaxScore) bad.push_back(at + ".score");
  }

  for (std::size_t i = 0; i < p.blacklist.size(); ++i) {
    const auto& t = p.blacklist[i];
    const auto at = "blacklist[" + std::to_string(i) + "]";
    if (trim(t.pattern).empty()) {
      bad.push_back(at + ".pattern");
    } else if (t.is_raw_regex) {
      try {
        CompiledMatcher::compile({t});
      } catch (const ParseError&) {
        bad.push_back(at + ".pattern");
      }
    }
    if (t.source != MatchSource::Blacklist) bad.push_back(at + ".source");
  }

  for (std::size_t i = 0; i < p.disabled_sites.size(); ++i) {
    const auto& host = p.disabled_sites[i];
    if (host.empty() || std::any_of(host.begin(), host.end(), is_ascii_space) ||
        normalize_host(host) != host) {
      bad.push_back("disabled_sites[" + std::to_string(i) + "]");
    }
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

json to_json(const UserProfile& p) {
  json overrides = json::array();
  for (const auto& o : p.overrides) overrides.push_back({{"term", o.term}, {"score", o.score}});
  json blacklist = json::array();
  for (const auto& t : p.blacklist) {
    blacklist.push_back({{"pattern", t.pattern}, {"is_raw_regex", t.is_raw_regex}});
  }
  return {
      {"sensitivity", p.sensitivity},
      {"overrides", std::move(overrides)},
      {"blacklist", std::move(blacklist)},
      {"blur_enabled", p.blur_enabled},
      {"profanity_enabled", p.profanity_enabled},
      {"disabled_sites", p.disabled_sites},
      {"version", p.version},
  };
}

UserProfile profile_from_json(const json& doc) {
  const std::string where = "profile";
  check_keys(doc,
             {"sensitivity", "overrides", "blacklist", "blur_enabled", "profanity_enabled",
              "disabled_sites", "version"},
             where);
  if (!doc.contains("version")) throw ParseError("profile: field 'version' is required");

  UserProfile p;
  const auto& version = doc.at("version");
  if (!version.is_number_unsigned() && !(version.is_number_integer() && version.get<long long>() >= 0)) {
    throw ParseError("profile: 'version' must be a non-negative integer");
  }
  p.version = version.get<std::uint64_t>();
  if (doc.contains("sensitivity")) {
    if (!doc.at("sensitivity").is_number_integer()) {
      throw ParseError("profile: 'sensitivity' must be an integer");
    }
    p.sensitivity = field<int>(doc, "sensitivity", where);
  }
  if (doc.contains("blur_enabled")) {
    if (!doc.at("blur_enabled").is_boolean()) throw ParseError("profile: 'blur_enabled' must be a boolean");
    p.blur_enabled = doc.at("blur_enabled").get<bool>();
  }
  if (doc.contains("profanity_enabled")) {
    if (!doc.at("profanity_enabled").is_boolean()) {
      throw ParseError("profile: 'profanity_enabled' must be a boolean");
    }
    p.profanity_enabled = doc.at("profanity_enabled").get<bool>();
  }
  if (doc.contains("overrides")) {
    const auto& arr = doc.at("overrides");
    if (!arr.is_array()) throw ParseError("profile: 'overrides' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto at = "profile.overrides[" + std::to_string(i) + "]";
      check_keys(arr[i], {"term", "score"}, at);
      if (!arr[i].contains("term") || !arr[i].contains("score") || !arr[i]["term"].is_string() ||
          !arr[i]["score"].is_number_integer()) {
        throw ParseError(at + ": needs string 'term' and integer 'score'");
      }
      p.overrides.push_back({arr[i]["term"].get<std::string>(), arr[i]["score"].get<int>()});
    }
  }
  if (doc.contains("blacklist")) {
    const auto& arr = doc.at("blacklist");
    if (!arr.is_array()) throw ParseError("profile: 'blacklist' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto at = "profile.blacklist[" + std::to_string(i) + "]";
      check_keys(arr[i], {"pattern", "is_raw_regex"}, at);
      if (!arr[i].contains("pattern") || !arr[i]["pattern"].is_string()) {
        throw ParseError(at + ": needs string 'pattern'");
      }
      MatchTerm term{arr[i]["pattern"].get<std::string>(), false, MatchSource::Blacklist};
      if (arr[i].contains("is_raw_regex")) {
        if (!arr[i]["is_raw_regex"].is_boolean()) {
          throw ParseError(at + ": 'is_raw_regex' must be a boolean");
        }
        term.is_raw_regex = arr[i]["is_raw_regex"].get<bool>();
      }
      p.blacklist.push_back(std::move(term));
    }
  }
  if (doc.contains("disabled_sites")) {
    const auto& arr = doc.at("disabled_sites");
    if (!arr.is_array()) throw ParseError("profile: 'disabled_sites' must be an array");
    for (const auto& host : arr) {
      if (!host.is_string()) throw ParseError("profile: 'disabled_sites' entries must be strings");
      p.disabled_sites.push_back(host.get<std::string>());
    }
  }
  validate(p);
  return p;
}

namespace {

struct Applier {
  UserProfile& p;

  void operator()(const change::SetSensitivity& c) const { p.sensitivity = c.value; }
  void operator()(const change::SetOverride& c) const {
    const auto term = normalize_term(c.entry.term);
    auto it = std::find_if(p.overrides.begin(), p.overrides.end(),
                           [&](const PolarityOverride& o) { return o.term == term; });
    if (it != p.overrides.end()) {
      it->score = c.entry.score;
    } else {
      p.overrides.push_back({term, c.entry.score});
    }
  }
  void operator()(const change::RemoveOverride& c) const {
    const auto term = normalize_term(c.term);
    std::erase_if(p.overrides, [&](const PolarityOverride& o) { return o.term == term; });
  }
  void operator()(const change::AddBlacklistTerm& c) const {
    if (std::find(p.blacklist.begin(), p.blacklist.end(), c.term) == p.blacklist.end()) {
      p.blacklist.push_back(c.term);
    }
  }
  void operator()(const change::RemoveBlacklistTerm& c) const {
    std::erase_if(p.blacklist, [&](const MatchTerm& t) { return t.pattern == c.pattern; });
  }
  void operator()(const change::SetBlur& c) const { p.blur_enabled = c.enabled; }
  void operator()(const change::SetProfanity& c) const { p.profanity_enabled = c.enabled; }
  void operator()(const change::AddDisabledSite& c) const {
    const auto host = normalize_host(c.host);
    if (std::find(p.disabled_sites.begin(), p.disabled_sites.end(), host) ==
        p.disabled_sites.end()) {
      p.disabled_sites.push_back(host);
    }
  }
  void operator()(const change::RemoveDisabledSite& c) const {
    std::erase(p.disabled_sites, normalize_host(c.host));
  }
  void operator()(const change::Replace& c) const {
    const auto version = p.version;
    p = c.profile;
    p.version = version;
    for (auto& o : p.overrides) o.term = normalize_term(o.term);
    for (auto& h : p.disabled_sites) h = normalize_host(h);
  }
};

}  // namespace

UserProfile update_profile(const UserProfile& current, const ProfileChange& c) {
  UserProfile next = current;
  std::visit(Applier{next}, c);
  validate(next);
  ++next.version;
  return next;
}

UserProfile load_profile_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open profile " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("profile " + path.string() + " is not valid JSON: " + e.what());
  }
  return profile_from_json(doc);
}

void save_profile_file(const UserProfile& profile, const std::filesystem::path& path) {
  static std::atomic<unsigned> counter{0};
  const std::string body = to_json(profile).dump(2) + "\n";
  auto tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);

  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error("cannot create " + tmp.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < body.size()) {
    const auto n = ::write(fd, body.data() + written, body.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      ::unlink(tmp.c_str());
      throw Error("cannot write " + tmp.string() + ": " + std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    ::unlink(tmp.c_str());
    throw Error("cannot flush " + tmp.string());
  }
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    const int err = errno;
    ::unlink(tmp.c_str());
    throw Error("cannot replace " + path.string() + ": " + std::strerror(err));
  }
  auto dir = path.parent_path();
  if (dir.empty()) dir = ".";
  if (const int dfd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC); dfd >= 0) {
    ::fsync(dfd);
    ::close(dfd);
  }
}

ProfileStore::ProfileStore(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) current_ = load_profile_file(path_);
}

UserProfile ProfileStore::get() const {
  std::lock_guard lock(mutex_);
  return current_;
}

UserProfile ProfileStore::put(const UserProfile& incoming) {
  std::lock_guard lock(mutex_);
  if (incoming.version != current_.version) {
    throw ConflictError("profile version " + std::to_string(incoming.version) +
                        " is stale; stored version is " + std::to_string(current_.version));
  }
  auto next = update_profile(current_, change::Replace{incoming});
  save_profile_file(next, path_);
  current_ = std::move(next);
  return current_;
}

}  // namespace detox

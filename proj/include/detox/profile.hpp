#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>
#include <variant>
#include <vector>

#include "detox/lexicon.hpp"
#include "detox/matchlist.hpp"

namespace detox {

struct UserProfile {
  int sensitivity = 0;
  std::vector<PolarityOverride> overrides;
  std::vector<MatchTerm> blacklist;
  bool blur_enabled = true;
  bool profanity_enabled = true;
  std::vector<std::string> disabled_sites;
  std::uint64_t version = 0;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

/// Throws ValidationError listing every offending field, e.g.
/// "sensitivity", "overrides[2].score", "blacklist[0].pattern".
void validate(const UserProfile& profile);

nlohmann::json to_json(const UserProfile& profile);

/// Strict decoding: unknown fields are rejected and `version` is required.
/// Shape errors throw ParseError; range violations throw ValidationError.
UserProfile profile_from_json(const nlohmann::json& doc);

namespace change {
struct SetSensitivity { int value; };
struct SetOverride { PolarityOverride entry; };  // adds or replaces by term
struct RemoveOverride { std::string term; };
struct AddBlacklistTerm { MatchTerm term; };
struct RemoveBlacklistTerm { std::string pattern; };
struct SetBlur { bool enabled; };
struct SetProfanity { bool enabled; };
struct AddDisabledSite { std::string host; };
struct RemoveDisabledSite { std::string host; };
/// Whole-document replacement; the incoming version field is ignored.
struct Replace { UserProfile profile; };
}  // namespace change

using ProfileChange =
    std::variant<change::SetSensitivity, change::SetOverride, change::RemoveOverride,
                 change::AddBlacklistTerm, change::RemoveBlacklistTerm, change::SetBlur,
                 change::SetProfanity, change::AddDisabledSite, change::RemoveDisabledSite,
                 change::Replace>;

/// Applies `change`, validates, and returns the result with version + 1.
/// Override terms and site hosts are normalized; blacklist literals are
/// kept as typed.
UserProfile update_profile(const UserProfile& current, const ProfileChange& change);

UserProfile load_profile_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, fsyncs, then renames over `path`, so a
/// reader or a crash never observes a partial document.
void save_profile_file(const UserProfile& profile, const std::filesystem::path& path);

/// Single-document profile store with optimistic versioning. Reads return a
/// snapshot; writes are serialized.
class ProfileStore {
 public:
  /// Loads `path` if it exists, otherwise starts from the default profile
  /// (version 0) without touching disk.
  explicit ProfileStore(std::filesystem::path path);

  UserProfile get() const;

  /// Stores `incoming` if its version equals the stored one; the stored copy
  /// gets version + 1. Throws ConflictError or ValidationError.
  UserProfile put(const UserProfile& incoming);

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  UserProfile current_;
};

}  // namespace detox

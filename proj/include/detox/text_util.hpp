#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace detox {

inline char ascii_lower(char c) noexcept {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = ascii_lower(c);
  return out;
}

inline bool is_ascii_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

/// Transparent hash so string-keyed maps can be probed with string_view.
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

/// `host` equals `suffix` or ends with "." + suffix. Both compared lowercase.
inline bool host_matches_suffix(std::string_view host, std::string_view suffix) {
  const auto h = ascii_lower(host);
  auto s = ascii_lower(suffix);
  while (!s.empty() && s.front() == '.') s.erase(0, 1);
  if (s.empty() || h.size() < s.size()) return false;
  if (h.compare(h.size() - s.size(), s.size(), s) != 0) return false;
  return h.size() == s.size() || h[h.size() - s.size() - 1] == '.';
}

}  // namespace detox

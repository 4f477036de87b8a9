#include "detox/extraction.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_map>

#include "detox/errors.hpp"
#include "detox/text_util.hpp"

namespace detox {

using nlohmann::json;

std::string_view to_string(Category category) {
  switch (category) {
    case Category::Organic: return "organic";
    case Category::Featured: return "featured";
    case Category::News: return "news";
    case Category::Video: return "video";
  }
  return "organic";
}

std::optional<Category> category_from_string(std::string_view name) {
  const auto lower = ascii_lower(name);
  for (auto c : {Category::Organic, Category::Featured, Category::News, Category::Video}) {
    if (to_string(c) == lower) return c;
  }
  return std::nullopt;
}

std::string_view to_string(HealthStatus status) {
  return status == HealthStatus::Ok ? "ok" : "degraded";
}

namespace {

std::string required_string(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::optional<html::Selector> optional_selector(const json& rule, const char* key,
                                                const std::string& where) {
  const auto it = rule.find(key);
  if (it == rule.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(where + ": '" + key + "' must be a string");
  try {
    return html::Selector::parse(it->get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      const int hi = hex_value(s[i + 1]);
      const int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i] == '+' ? ' ' : s[i]);
  }
  return out;
}

const html::Node* first_anchor(const html::Node& container) {
  if (container.tag == "a" && !trim(container.attribute("href").value_or("")).empty()) {
    return &container;
  }
  std::vector<const html::Node*> pending(container.children.rbegin(), container.children.rend());
  while (!pending.empty()) {
    const html::Node* n = pending.back();
    pending.pop_back();
    if (n->is_element() && n->tag == "a" && !trim(n->attribute("href").value_or("")).empty()) {
      return n;
    }
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) pending.push_back(*it);
  }
  return nullptr;
}

}  // namespace

PatternSet parse_patterns(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("pattern config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("pattern config must be a JSON object");

  PatternSet set;
  set.site_id = required_string(doc, "site_id", "pattern config");
  if (set.site_id.empty()) throw ParseError("pattern config: site_id is empty");
  if (const auto it = doc.find("version"); it != doc.end()) {
    if (!it->is_string()) throw ParseError("pattern config: 'version' must be a string");
    set.version = it->get<std::string>();
  }
  if (const auto it = doc.find("exclusion_hosts"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("pattern config: 'exclusion_hosts' must be an array");
    for (const auto& host : *it) {
      if (!host.is_string() || host.get<std::string>().empty()) {
        throw ParseError("pattern config: exclusion_hosts entries must be non-empty strings");
      }
      set.exclusion_hosts.push_back(ascii_lower(host.get<std::string>()));
    }
  }
  const auto rules = doc.find("rules");
  if (rules == doc.end() || !rules->is_array() || rules->empty()) {
    throw ParseError("pattern config: 'rules' must be a non-empty array");
  }
  for (std::size_t i = 0; i < rules->size(); ++i) {
    const auto& r = (*rules)[i];
    const std::string where = "rule " + std::to_string(i);
    if (!r.is_object()) throw ParseError(where + ": must be an object");
    PatternRule rule;
    const auto category_name = required_string(r, "category", where);
    const auto category = category_from_string(category_name);
    if (!category) throw ParseError(where + ": unknown category '" + category_name + "'");
    rule.category = *category;
    const auto container = required_string(r, "container_selector", where);
    try {
      rule.container = html::Selector::parse(container);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    rule.title = optional_selector(r, "title_selector", where);
    rule.link = optional_selector(r, "link_selector", where);
    set.rules.push_back(std::move(rule));
  }
  return set;
}

PatternSet load_patterns_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open pattern config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_patterns(buffer.str());
}

namespace {

std::string authority_host(std::string_view url) {
  std::string_view rest = trim(url);
  const auto scheme_end = rest.find("://");
  if (scheme_end != std::string_view::npos &&
      std::all_of(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(scheme_end),
                  [](char c) {
                    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                           (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.';
                  }) &&
      scheme_end > 0) {
    rest.remove_prefix(scheme_end + 3);
  } else if (rest.starts_with("//")) {
    rest.remove_prefix(2);
  } else {
    return {};
  }
  std::size_t stop = 0;
  while (stop < rest.size() && rest[stop] != '/' && rest[stop] != '?' && rest[stop] != '#') ++stop;
  std::string_view authority = rest.substr(0, stop);
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority.remove_prefix(at + 1);
  }
  if (authority.starts_with('[')) {
    const auto close = authority.find(']');
    authority = authority.substr(0, close == std::string_view::npos ? authority.size() : close + 1);
  } else if (const auto colon = authority.find(':'); colon != std::string_view::npos) {
    authority = authority.substr(0, colon);
  }
  while (authority.ends_with('.')) authority.remove_suffix(1);
  return ascii_lower(authority);
}

}  // namespace

std::string resolve_redirect(std::string_view url) {
  const auto t = trim(url);
  const auto q = t.find('?');
  if (q == std::string_view::npos) return std::string(t);
  const auto path = t.substr(0, q);
  if (!(path == "/url" || path.ends_with("/url"))) return std::string(t);
  std::string_view query = t.substr(q + 1);
  query = query.substr(0, std::min(query.size(), query.find('#')));
  for (std::size_t i = 0; i < query.size();) {
    std::size_t j = i;
    while (j < query.size() && query[j] != '&') ++j;
    const std::string_view pair = query.substr(i, j - i);
    std::size_t eq = 0;
    while (eq < pair.size() && pair[eq] != '=') ++eq;
    const std::string_view key = pair.substr(0, eq);
    if (eq < pair.size() && (key == "q" || key == "url")) {
      auto target = percent_decode(pair.substr(eq + 1));
      if (!authority_host(target).empty()) return target;
    }
    i = j + 1;
  }
  return std::string(t);
}

std::string host_of(std::string_view url) { return authority_host(resolve_redirect(url)); }

Extraction extract(const html::Document& doc, const PatternSet& patterns, std::size_t id_base) {
  Extraction result;
  const auto elements = doc.elements();

  std::unordered_map<const html::Node*, std::optional<std::size_t>> rule_of;
  auto matching_rule = [&](const html::Node* n) -> std::optional<std::size_t> {
    if (const auto it = rule_of.find(n); it != rule_of.end()) return it->second;
    std::optional<std::size_t> found;
    for (std::size_t r = 0; r < patterns.rules.size(); ++r) {
      if (patterns.rules[r].container.matches(*n)) {
        found = r;
        break;
      }
    }
    rule_of.emplace(n, found);
    return found;
  };

  std::map<std::size_t, std::pair<const html::Node*, std::size_t>> containers;  // by begin
  for (const html::Node* el : elements) {
    if (el->tag != "a" || trim(el->attribute("href").value_or("")).empty()) continue;
    ++result.anchor_count;
    for (const html::Node* n = el; n != nullptr && n->is_element(); n = n->parent) {
      if (const auto rule = matching_rule(n)) {
        containers.emplace(n->begin, std::make_pair(n, *rule));
        break;
      }
    }
  }

  auto nested_in_other = [&](const html::Node* n) {
    for (const html::Node* p = n->parent; p != nullptr; p = p->parent) {
      const auto it = containers.find(p->begin);
      if (it != containers.end() && it->second.first == p) return true;
    }
    return false;
  };

  for (const auto& [begin, entry] : containers) {
    const auto [node, rule_index] = entry;
    if (nested_in_other(node)) continue;
    const PatternRule& rule = patterns.rules[rule_index];

    ExtractedItem item;
    item.item_id = id_base + result.items.size();
    item.category = rule.category;
    item.rule_index = rule_index;
    item.container = node;
    item.text = html::extract_text(*node);

    const html::Node* title_node = nullptr;
    if (rule.title) title_node = html::select_first(*node, *rule.title);
    if (title_node == nullptr) {
      static const auto kHeading = html::Selector::parse("h3");
      title_node = html::select_first(*node, kHeading);
    }
    const html::Node* link_node = nullptr;
    if (rule.link) link_node = html::select_first(*node, *rule.link);
    if (link_node == nullptr || !link_node->attribute("href")) link_node = first_anchor(*node);
    if (title_node == nullptr) title_node = link_node;
    if (title_node != nullptr) item.title = html::extract_text(*title_node);
    if (link_node != nullptr) {
      item.url = resolve_redirect(link_node->attribute("href").value_or(""));
      item.host = host_of(item.url);
    }
    item.excluded = std::any_of(patterns.exclusion_hosts.begin(), patterns.exclusion_hosts.end(),
                                [&](const std::string& s) { return host_matches_suffix(item.host, s); });
    item.processed = html::self_or_ancestor_has(*node, "data-detox");
    result.items.push_back(std::move(item));
  }
  return result;
}

HealthReport pattern_health(const Extraction& extraction, const PatternSet& patterns) {
  HealthReport report;
  report.anchor_count = extraction.anchor_count;
  report.item_count = extraction.items.size();
  for (std::size_t r = 0; r < patterns.rules.size(); ++r) {
    RuleHealth rh;
    rh.rule_index = r;
    rh.category = patterns.rules[r].category;
    rh.selector = patterns.rules[r].container.text();
    rh.matched = static_cast<std::size_t>(
        std::count_if(extraction.items.begin(), extraction.items.end(),
                      [&](const ExtractedItem& item) { return item.rule_index == r; }));
    report.rules.push_back(std::move(rh));
  }
  report.status = extraction.anchor_count > 0 && extraction.items.empty() ? HealthStatus::Degraded
                                                                          : HealthStatus::Ok;
  return report;
}

}  // namespace detox

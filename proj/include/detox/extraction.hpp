#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detox/html.hpp"
#include "detox/selector.hpp"

namespace detox {

enum class Category { Organic, Featured, News, Video };

std::string_view to_string(Category category);
std::optional<Category> category_from_string(std::string_view name);

struct PatternRule {
  Category category = Category::Organic;
  html::Selector container;
  std::optional<html::Selector> title;
  std::optional<html::Selector> link;
};

struct PatternSet {
  std::string site_id;
  std::string version;
  std::vector<std::string> exclusion_hosts;
  std::vector<PatternRule> rules;
};

/// Parses the JSON pattern config:
///   {"site_id", "version", "exclusion_hosts": [...],
///    "rules": [{"category", "container_selector", "title_selector"?, "link_selector"?}]}
/// Throws ParseError; selector errors name the rule index.
PatternSet parse_patterns(std::string_view json_text);
PatternSet load_patterns_file(const std::filesystem::path& path);

struct ExtractedItem {
  std::size_t item_id = 0;
  Category category = Category::Organic;
  std::size_t rule_index = 0;
  std::string title;
  std::string text;
  std::string url;
  std::string host;
  const html::Node* container = nullptr;
  bool excluded = false;
  /// Container (or an ancestor) already carries a data-detox marker.
  bool processed = false;
};

struct Extraction {
  std::vector<ExtractedItem> items;
  /// Anchors with a non-empty href anywhere in the document.
  std::size_t anchor_count = 0;
};

/// Walks every anchor with a non-empty href up to its nearest ancestor
/// matching any rule's container selector; the first rule in file order
/// assigns the category. One item per container, in document order, and a
/// container nested inside another selected container is folded into the
/// outer one. Item ids are `id_base + position`.
Extraction extract(const html::Document& doc, const PatternSet& patterns, std::size_t id_base = 0);

/// Host of `url`, lowercased, without port or credentials. Google-style
/// redirect links (`/url?q=<target>`) resolve to the target's host.
std::string host_of(std::string_view url);

/// Target of a `/url?q=` redirect link, or the input unchanged.
std::string resolve_redirect(std::string_view url);

enum class HealthStatus { Ok, Degraded };

std::string_view to_string(HealthStatus status);

struct RuleHealth {
  std::size_t rule_index = 0;
  Category category = Category::Organic;
  std::string selector;
  std::size_t matched = 0;
};

struct HealthReport {
  HealthStatus status = HealthStatus::Ok;
  std::size_t anchor_count = 0;
  std::size_t item_count = 0;
  std::vector<RuleHealth> rules;
};

/// Degraded when the page has at least one anchor but no rule matched.
HealthReport pattern_health(const Extraction& extraction, const PatternSet& patterns);

}  // namespace detox

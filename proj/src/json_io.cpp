#include "detox/json_io.hpp"

namespace detox {

using nlohmann::json;

json to_json(const SentimentReport& r) {
  json matches = json::array();
  for (const auto& m : r.matches) {
    matches.push_back({{"term", m.term}, {"score", m.score}, {"token_index", m.token_index}});
  }
  return {{"sum", r.sum},
          {"matches", std::move(matches)},
          {"token_count", r.token_count},
          {"bucket", to_string(r.bucket)},
          {"flagged", r.flagged},
          {"threshold", r.threshold}};
}

json to_json(const Prediction& p) {
  return {{"category", p.category},
          {"log_posterior", p.log_posterior},
          {"runner_up", p.runner_up},
          {"margin", p.margin}};
}

json to_json(const KeywordTags& tags) {
  json list = json::array();
  for (const auto& t : tags.tags) list.push_back({{"token", t.token}, {"count", t.count}});
  return {{"tags", std::move(list)}, {"k", tags.k}};
}

json to_json(const MatchHit& hit) {
  return {{"term",
           {{"pattern", hit.term.pattern},
            {"is_raw_regex", hit.term.is_raw_regex},
            {"source", to_string(hit.term.source)}}},
          {"start", hit.start},
          {"end", hit.end},
          {"excerpt", hit.excerpt}};
}

json to_json(const HealthReport& h) {
  json rules = json::array();
  for (const auto& r : h.rules) {
    rules.push_back({{"rule_index", r.rule_index},
                     {"category", to_string(r.category)},
                     {"selector", r.selector},
                     {"matched", r.matched}});
  }
  return {{"status", to_string(h.status)},
          {"anchor_count", h.anchor_count},
          {"item_count", h.item_count},
          {"rules", std::move(rules)}};
}

json to_json(const FilterDecision& d) {
  json hits = json::array();
  for (const auto& h : d.hits) hits.push_back(to_json(h));
  return {{"item_id", d.item_id},
          {"action", to_string(d.action)},
          {"reason", to_string(d.reason)},
          {"sentiment", to_json(d.sentiment)},
          {"category", d.category ? to_json(*d.category) : json(nullptr)},
          {"keywords", d.keywords ? to_json(*d.keywords) : json(nullptr)},
          {"domain", d.domain},
          {"hits", std::move(hits)}};
}

json to_json(const ScanReport& r) {
  json hits = json::array();
  for (const auto& h : r.hits) hits.push_back(to_json(h));
  return {{"site", r.site}, {"hits", std::move(hits)}, {"warn", r.warn}};
}

}  // namespace detox

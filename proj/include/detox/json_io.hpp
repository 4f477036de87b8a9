#pragma once

#include <nlohmann/json.hpp>

#include "detox/extraction.hpp"
#include "detox/lexicon.hpp"
#include "detox/matchlist.hpp"
#include "detox/pipeline.hpp"
#include "detox/textmodel.hpp"

namespace detox {

// Wire representations. Objects use nlohmann's default (sorted) key order,
// so dumps are deterministic.
nlohmann::json to_json(const SentimentReport& report);
nlohmann::json to_json(const Prediction& prediction);
nlohmann::json to_json(const KeywordTags& tags);
nlohmann::json to_json(const MatchHit& hit);
nlohmann::json to_json(const HealthReport& health);
nlohmann::json to_json(const FilterDecision& decision);
nlohmann::json to_json(const ScanReport& report);

}  // namespace detox

#include "detox/pipeline.hpp"

#include <algorithm>
#include <charconv>

#include "detox/errors.hpp"
#include "detox/html.hpp"
#include "detox/text_util.hpp"

namespace detox {

std::string_view to_string(Mode mode) {
  return mode == Mode::SearchResults ? "search" : "page";
}

std::optional<Mode> mode_from_string(std::string_view name) {
  if (name == "search" || name == "search_results") return Mode::SearchResults;
  if (name == "page" || name == "generic_page") return Mode::GenericPage;
  return std::nullopt;
}

std::string_view to_string(Action action) {
  switch (action) {
    case Action::Keep: return "keep";
    case Action::Annotate: return "annotate";
    case Action::Blur: return "blur";
    case Action::Remove: return "remove";
    case Action::Placeholder: return "placeholder";
  }
  return "keep";
}

std::string_view to_string(Reason reason) {
  switch (reason) {
    case Reason::Blacklist: return "blacklist";
    case Reason::Profanity: return "profanity";
    case Reason::Sentiment: return "sentiment";
    case Reason::Excluded: return "excluded";
  }
  return "sentiment";
}

Matchers build_matchers(const UserProfile& profile, const Engine& engine) {
  Matchers m;
  m.blacklist = CompiledMatcher::compile(profile.blacklist);
  if (profile.profanity_enabled) m.profanity = engine.profanity;
  return m;
}

namespace {

void attach_deep_analysis(FilterDecision& d, const ExtractedItem& item, const Engine& engine) {
  if (engine.model != nullptr) d.category = engine.model->predict(item.text);
  static const StopwordSet kNone;
  d.keywords = extract_keywords(item.text, engine.stopwords ? *engine.stopwords : kNone,
                                engine.keyword_count);
}

std::string join_keywords(const std::optional<KeywordTags>& tags) {
  std::string out;
  if (!tags) return out;
  for (const auto& t : tags->tags) {
    if (!out.empty()) out.push_back(',');
    out += t.token;
  }
  return out;
}

std::string attr(std::string_view name, std::string_view value) {
  std::string out = " ";
  out += name;
  out += "=\"";
  out += html::escape_attribute(value);
  out += '"';
  return out;
}

struct Edit {
  std::size_t begin;
  std::size_t end;
  std::string replacement;
};

std::string apply_edits(std::string_view source, std::vector<Edit> edits) {
  std::stable_sort(edits.begin(), edits.end(),
                   [](const Edit& a, const Edit& b) { return a.begin < b.begin; });
  std::string out;
  out.reserve(source.size() + 256 * edits.size());
  std::size_t pos = 0;
  for (const auto& e : edits) {
    out.append(source.substr(pos, e.begin - pos));
    out += e.replacement;
    pos = e.end;
  }
  out.append(source.substr(pos));
  return out;
}

std::optional<std::size_t> parse_id(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::size_t next_item_id(const html::Document& doc) {
  std::size_t next = 0;
  for (const html::Node* el : doc.elements()) {
    if (const auto id = el->attribute("data-detox-id")) {
      if (const auto v = parse_id(*id)) next = std::max(next, *v + 1);
    }
  }
  return next;
}

// Byte offset inside the start tag where extra attributes can be inserted.
std::size_t attribute_insert_point(std::string_view src, const html::Node& el) {
  std::size_t p = el.open_end;
  if (p > el.begin && src[p - 1] == '>') {
    --p;
    if (p > el.begin && src[p - 1] == '/') --p;
  }
  return p;
}

}  // namespace

FilterDecision decide(const ExtractedItem& item, const UserProfile& profile, const Engine& engine,
                      const Matchers& matchers, Mode mode) {
  FilterDecision d;
  d.item_id = item.item_id;
  d.domain = item.host;
  d.sentiment = score(item.text, *engine.lexicon, profile.overrides, profile.sensitivity);

  if (item.excluded) {
    d.action = Action::Keep;
    d.reason = Reason::Excluded;
  } else if (auto hits = matchers.blacklist.find_all(item.text); !hits.empty()) {
    d.reason = Reason::Blacklist;
    d.hits = std::move(hits);
  } else if (matchers.profanity != nullptr) {
    if (auto phits = matchers.profanity->find_all(item.text); !phits.empty()) {
      d.reason = Reason::Profanity;
      d.hits = std::move(phits);
    }
  }

  if (!d.hits.empty()) {
    d.action = (!profile.blur_enabled && mode == Mode::SearchResults) ? Action::Remove
                                                                      : Action::Blur;
  } else if (d.reason != Reason::Excluded) {
    d.reason = Reason::Sentiment;
    d.action = d.sentiment.flagged ? Action::Placeholder : Action::Annotate;
  }

  if (d.action == Action::Placeholder || engine.deep_analysis_all) {
    attach_deep_analysis(d, item, engine);
  }
  return d;
}

FilteredDocument filter_document(std::string html_text, const PatternSet& patterns,
                                 const UserProfile& profile, const Engine& engine, Mode mode) {
  const auto doc = html::Document::parse(std::move(html_text));
  const std::string_view src = doc.source();
  const auto extraction = extract(doc, patterns, next_item_id(doc));

  FilteredDocument result;
  result.health = pattern_health(extraction, patterns);
  const Matchers matchers = build_matchers(profile, engine);

  std::vector<Edit> edits;
  for (const auto& item : extraction.items) {
    if (item.processed) continue;
    auto d = decide(item, profile, engine, matchers, mode);
    const html::Node& c = *item.container;
    const auto id = std::to_string(d.item_id);

    switch (d.action) {
      case Action::Keep:
        break;
      case Action::Annotate: {
        const auto at = attribute_insert_point(src, c);
        edits.push_back({at, at,
                         attr("data-detox", "annotated") + attr("data-detox-id", id) +
                             attr("data-bucket", to_string(d.sentiment.bucket)) +
                             attr("data-score", std::to_string(d.sentiment.sum))});
        break;
      }
      case Action::Placeholder: {
        std::string marker = "<div" + attr("data-detox", "placeholder") + attr("data-detox-id", id) +
                             attr("data-domain", d.domain) +
                             attr("data-score", std::to_string(d.sentiment.sum)) +
                             attr("data-bucket", to_string(d.sentiment.bucket)) +
                             attr("data-category", d.category ? d.category->category : "") +
                             attr("data-keywords", join_keywords(d.keywords)) + ">";
        marker += "Filtered result from " + html::escape_text(d.domain.empty() ? "unknown site" : d.domain);
        marker += "</div>";
        edits.push_back({c.begin, c.end, std::move(marker)});
        break;
      }
      case Action::Blur:
        edits.push_back({c.begin, c.begin,
                         "<div" + attr("data-detox", "blur") + attr("data-detox-id", id) +
                             attr("data-reason", to_string(d.reason)) +
                             attr("style", "filter:blur(6px)") + ">"});
        edits.push_back({c.end, c.end, "</div>"});
        break;
      case Action::Remove:
        edits.push_back({c.begin, c.end,
                         "<div" + attr("data-detox", "removed") + attr("data-detox-id", id) +
                             attr("data-reason", to_string(d.reason)) + "></div>"});
        break;
    }
    if (d.action != Action::Keep) result.originals.emplace(d.item_id, std::string(doc.outer_html(c)));
    result.decisions.push_back(std::move(d));
  }

  result.html = apply_edits(src, std::move(edits));
  return result;
}

FilteredDocument reinstate(FilteredDocument doc, std::size_t item_id) {
  const auto original = doc.originals.find(item_id);
  if (original == doc.originals.end()) {
    throw NotFoundError("no original markup for item " + std::to_string(item_id));
  }
  const auto parsed = html::Document::parse(doc.html);
  const auto wanted = std::to_string(item_id);
  const html::Node* marker = nullptr;
  for (const html::Node* el : parsed.elements()) {
    if (el->attribute("data-detox") && el->attribute("data-detox-id") == wanted) {
      marker = el;
      break;
    }
  }
  if (marker == nullptr) {
    throw NotFoundError("item " + std::to_string(item_id) + " has no marker in the document");
  }
  doc.html = apply_edits(parsed.source(), {{marker->begin, marker->end, original->second}});
  for (auto& d : doc.decisions) {
    if (d.item_id == item_id) d.action = Action::Keep;
  }
  return doc;
}

ScanReport scan_page(std::string_view text_or_html, std::string_view site,
                     const UserProfile& profile) {
  ScanReport report;
  report.site = ascii_lower(trim(site));
  std::string text;
  if (html::looks_like_html(text_or_html)) {
    text = html::extract_text(html::Document::parse(std::string(text_or_html)).root());
  } else {
    text = std::string(text_or_html);
  }
  report.hits = CompiledMatcher::compile(profile.blacklist).find_all(text);
  const bool disabled =
      std::any_of(profile.disabled_sites.begin(), profile.disabled_sites.end(),
                  [&](const std::string& s) { return host_matches_suffix(report.site, s); });
  report.warn = !report.hits.empty() && !disabled;
  return report;
}

}  // namespace detox

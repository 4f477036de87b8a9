#include "detox/html.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <utility>

#include "detox/text_util.hpp"

namespace detox::html {

namespace {

constexpr std::array kVoidTags = {"area", "base", "br",   "col",   "embed", "hr",    "img",
                                  "input", "link", "meta", "param", "source", "track", "wbr"};
constexpr std::array kRawTextTags = {"script", "style", "textarea", "title", "xmp"};
constexpr std::array kClosesParagraph = {
    "address", "article", "aside", "blockquote", "details", "div",    "dl",  "fieldset",
    "figure",  "footer",  "form",  "h1",         "h2",      "h3",     "h4",  "h5",
    "h6",      "header",  "hr",    "main",       "menu",    "nav",    "ol",  "p",
    "pre",     "section", "table", "ul"};
constexpr std::array kParagraphScope = {"applet", "button", "caption", "html",   "marquee",
                                        "object", "table",  "td",      "template", "th"};

template <std::size_t N>
bool contains(const std::array<const char*, N>& set, std::string_view tag) {
  return std::any_of(set.begin(), set.end(), [&](const char* t) { return tag == t; });
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_tag_char(char c) {
  return is_alpha(c) || (c >= '0' && c <= '9') || c == '-' || c == ':' || c == '_';
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (ascii_lower(s[pos + i]) != prefix[i]) return false;
  }
  return true;
}

std::size_t find_ci(std::string_view s, std::string_view needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
    if (starts_with_ci(s, i, needle)) return i;
  }
  return std::string_view::npos;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct NamedEntity {
  std::string_view name;
  char32_t cp;
};

constexpr std::array<NamedEntity, 24> kEntities = {{
    {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},
    {"apos", '\''},    {"nbsp", 0xA0},    {"copy", 0xA9},    {"reg", 0xAE},
    {"laquo", 0xAB},   {"raquo", 0xBB},   {"middot", 0xB7},  {"hellip", 0x2026},
    {"ndash", 0x2013}, {"mdash", 0x2014}, {"lsquo", 0x2018}, {"rsquo", 0x2019},
    {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"bull", 0x2022},  {"trade", 0x2122},
    {"euro", 0x20AC},  {"times", 0xD7},   {"deg", 0xB0},     {"pound", 0xA3},
}};

class Builder {
 public:
  Builder(std::string_view src, std::vector<std::unique_ptr<Node>>& nodes)
      : src_(src), nodes_(nodes) {}

  void run() {
    Node& root = make(NodeKind::Document, nullptr);
    root.begin = 0;
    root.end = src_.size();
    stack_.push_back(&root);

    std::size_t pos = 0;
    while (pos < src_.size()) {
      const auto lt = src_.find('<', pos);
      if (lt == std::string_view::npos) break;
      const char next = lt + 1 < src_.size() ? src_[lt + 1] : '\0';
      if (src_.compare(lt, 4, "<!--") == 0) {
        const auto close = src_.find("-->", lt + 4);
        pos = close == std::string_view::npos ? src_.size() : close + 3;
        add_leaf(NodeKind::Comment, lt, pos);
      } else if (next == '!' || next == '?') {
        const auto close = src_.find('>', lt + 2);
        pos = close == std::string_view::npos ? src_.size() : close + 1;
        add_leaf(NodeKind::Comment, lt, pos);
      } else if (next == '/' && lt + 2 < src_.size() && is_alpha(src_[lt + 2])) {
        pos = end_tag(lt);
      } else if (is_alpha(next)) {
        pos = start_tag(lt);
      } else {
        pos = lt + 1;
        continue;
      }
      text_start_ = pos;
    }
    flush_text(src_.size());
    while (stack_.size() > 1) {
      stack_.back()->end = src_.size();
      stack_.pop_back();
    }
  }

 private:
  Node& make(NodeKind kind, Node* parent) {
    nodes_.push_back(std::make_unique<Node>());
    Node& n = *nodes_.back();
    n.kind = kind;
    n.parent = parent;
    if (parent) parent->children.push_back(&n);
    return n;
  }

  void flush_text(std::size_t upto) {
    if (text_start_ >= upto) return;
    Node& t = make(NodeKind::Text, stack_.back());
    t.begin = text_start_;
    t.open_end = upto;
    t.end = upto;
    t.text = decode_entities(src_.substr(text_start_, upto - text_start_));
    text_start_ = upto;
  }

  void add_leaf(NodeKind kind, std::size_t begin, std::size_t end) {
    flush_text(begin);
    Node& n = make(kind, stack_.back());
    n.begin = begin;
    n.open_end = end;
    n.end = end;
  }

  std::string read_name(std::size_t& i) const {
    std::string name;
    while (i < src_.size() && is_tag_char(src_[i])) name.push_back(ascii_lower(src_[i++]));
    return name;
  }

  // Closes stack entries above index `keep` (exclusive) at byte `at`.
  void close_above(std::size_t keep, std::size_t at) {
    while (stack_.size() > keep + 1) {
      stack_.back()->end = at;
      stack_.pop_back();
    }
  }

  // Index of the innermost open `tag`, searching down until a scope tag.
  template <std::size_t N>
  std::optional<std::size_t> find_open(std::string_view tag,
                                       const std::array<const char*, N>& scope) const {
    for (std::size_t k = stack_.size(); k-- > 1;) {
      if (stack_[k]->tag == tag) return k;
      if (contains(scope, stack_[k]->tag)) return std::nullopt;
    }
    return std::nullopt;
  }

  void implied_end(std::string_view tag, std::size_t at) {
    auto close_at = [&](std::optional<std::size_t> k) {
      if (k) close_above(*k - 1, at);
    };
    if (contains(kClosesParagraph, tag)) close_at(find_open("p", kParagraphScope));
    if (tag == "li") close_at(find_open("li", std::array{"ul", "ol"}));
    if (tag == "dt" || tag == "dd") {
      auto k = find_open("dt", std::array{"dl"});
      if (!k) k = find_open("dd", std::array{"dl"});
      close_at(k);
    }
    if (tag == "option") close_at(find_open("option", std::array{"select"}));
    if (tag == "tr") close_at(find_open("tr", std::array{"table"}));
    if (tag == "td" || tag == "th") {
      auto k = find_open("td", std::array{"tr", "table"});
      if (!k) k = find_open("th", std::array{"tr", "table"});
      close_at(k);
    }
  }

  std::size_t end_tag(std::size_t lt) {
    std::size_t i = lt + 2;
    const std::string name = read_name(i);
    const auto gt = src_.find('>', i);
    const std::size_t after = gt == std::string_view::npos ? src_.size() : gt + 1;
    flush_text(lt);
    for (std::size_t k = stack_.size(); k-- > 1;) {
      if (stack_[k]->tag == name) {
        close_above(k, lt);
        stack_.back()->end = after;
        stack_.pop_back();
        break;
      }
    }
    return after;
  }

  std::size_t start_tag(std::size_t lt) {
    std::size_t i = lt + 1;
    std::string name = read_name(i);
    std::vector<Attribute> attrs;
    bool self_closing = false;
    const std::size_t n = src_.size();
    while (i < n) {
      while (i < n && is_ascii_space(src_[i])) ++i;
      if (i >= n) break;
      if (src_[i] == '>') {
        ++i;
        break;
      }
      if (src_[i] == '/') {
        ++i;
        if (i < n && src_[i] == '>') {
          self_closing = true;
          ++i;
          break;
        }
        continue;
      }
      std::string attr_name;
      while (i < n && !is_ascii_space(src_[i]) && src_[i] != '=' && src_[i] != '>' &&
             (src_[i] != '/' || attr_name.empty())) {
        attr_name.push_back(ascii_lower(src_[i++]));
      }
      while (i < n && is_ascii_space(src_[i])) ++i;
      std::string value;
      if (i < n && src_[i] == '=') {
        ++i;
        while (i < n && is_ascii_space(src_[i])) ++i;
        if (i < n && (src_[i] == '"' || src_[i] == '\'')) {
          const char quote = src_[i++];
          const auto close = src_.find(quote, i);
          const std::size_t stop = close == std::string_view::npos ? n : close;
          value = decode_entities(src_.substr(i, stop - i));
          i = stop == n ? n : stop + 1;
        } else {
          const std::size_t from = i;
          while (i < n && !is_ascii_space(src_[i]) && src_[i] != '>') ++i;
          value = decode_entities(src_.substr(from, i - from));
        }
      }
      if (attr_name.empty()) {
        ++i;
        continue;
      }
      const bool dup = std::any_of(attrs.begin(), attrs.end(),
                                   [&](const Attribute& a) { return a.name == attr_name; });
      if (!dup) attrs.push_back({std::move(attr_name), std::move(value)});
    }
    const std::size_t open_end = std::min(i, n);

    flush_text(lt);
    implied_end(name, lt);
    Node& el = make(NodeKind::Element, stack_.back());
    el.tag = std::move(name);
    el.attributes = std::move(attrs);
    el.begin = lt;
    el.open_end = open_end;

    if (self_closing || contains(kVoidTags, el.tag)) {
      el.end = open_end;
      return open_end;
    }
    if (contains(kRawTextTags, el.tag)) {
      const auto close = find_ci(src_, "</" + el.tag, open_end);
      const std::size_t content_end = close == std::string_view::npos ? n : close;
      if (content_end > open_end) {
        Node& t = make(NodeKind::Text, &el);
        t.begin = open_end;
        t.open_end = content_end;
        t.end = content_end;
        const auto raw = src_.substr(open_end, content_end - open_end);
        const bool rcdata = el.tag == "textarea" || el.tag == "title";
        t.text = rcdata ? decode_entities(raw) : std::string(raw);
      }
      std::size_t after = n;
      if (close != std::string_view::npos) {
        const auto gt = src_.find('>', close);
        after = gt == std::string_view::npos ? n : gt + 1;
      }
      el.end = after;
      return after;
    }
    stack_.push_back(&el);
    return open_end;
  }

  std::string_view src_;
  std::vector<std::unique_ptr<Node>>& nodes_;
  std::vector<Node*> stack_;
  std::size_t text_start_ = 0;
};

bool is_collapsible_space(std::string_view s, std::size_t i, std::size_t& width) {
  if (is_ascii_space(s[i])) {
    width = 1;
    return true;
  }
  if (static_cast<unsigned char>(s[i]) == 0xC2 && i + 1 < s.size() &&
      static_cast<unsigned char>(s[i + 1]) == 0xA0) {
    width = 2;
    return true;
  }
  return false;
}

}  // namespace

std::optional<std::string_view> Node::attribute(std::string_view name) const {
  for (const auto& a : attributes) {
    if (a.name == name) return std::string_view(a.value);
  }
  return std::nullopt;
}

bool Node::has_class(std::string_view cls) const {
  const auto value = attribute("class");
  if (!value) return false;
  std::string_view rest = *value;
  while (!rest.empty()) {
    std::size_t i = 0;
    while (i < rest.size() && is_ascii_space(rest[i])) ++i;
    std::size_t j = i;
    while (j < rest.size() && !is_ascii_space(rest[j])) ++j;
    if (j > i && rest.substr(i, j - i) == cls) return true;
    rest.remove_prefix(j);
  }
  return false;
}

Document Document::parse(std::string source) {
  Document doc;
  doc.source_ = std::move(source);
  Builder(doc.source_, doc.nodes_).run();
  return doc;
}

std::vector<const Node*> Document::elements() const {
  std::vector<const Node*> out;
  std::vector<const Node*> pending{&root()};
  while (!pending.empty()) {
    const Node* n = pending.back();
    pending.pop_back();
    if (n->is_element()) out.push_back(n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) pending.push_back(*it);
  }
  return out;
}

std::string extract_text(const Node& node) {
  std::string raw;
  std::vector<const Node*> pending{&node};
  while (!pending.empty()) {
    const Node* n = pending.back();
    pending.pop_back();
    if (n->kind == NodeKind::Text) {
      raw += n->text;
      continue;
    }
    if (n->kind == NodeKind::Comment) continue;
    if (n->is_element() && (n->tag == "script" || n->tag == "style")) continue;
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) pending.push_back(*it);
  }

  std::string out;
  out.reserve(raw.size());
  bool in_space = false;
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t width = 0;
    if (is_collapsible_space(raw, i, width)) {
      in_space = true;
      i += width;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(raw[i++]);
  }
  return out;
}

std::string decode_entities(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw[i] != '&') {
      out.push_back(raw[i++]);
      continue;
    }
    const auto semi = raw.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 32) {
      out.push_back(raw[i++]);
      continue;
    }
    const std::string_view body = raw.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (body.size() > 1 && body[0] == '#') {
      const bool hex = body[1] == 'x' || body[1] == 'X';
      const std::string_view digits = body.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      const auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (!digits.empty() && ec == std::errc{} && ptr == digits.data() + digits.size() &&
          cp > 0 && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF)) {
        append_utf8(out, cp);
        decoded = true;
      }
    } else {
      for (const auto& e : kEntities) {
        if (e.name == body) {
          append_utf8(out, e.cp);
          decoded = true;
          break;
        }
      }
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out.push_back(raw[i++]);
    }
  }
  return out;
}

std::string escape_attribute(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (const char c : value) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string escape_text(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (const char c : value) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

bool looks_like_html(std::string_view text) {
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] != '<') continue;
    const char c = text[i + 1];
    if (is_alpha(c) || c == '!' || (c == '/' && i + 2 < text.size() && is_alpha(text[i + 2]))) {
      return true;
    }
  }
  return false;
}

bool self_or_ancestor_has(const Node& node, std::string_view attribute) {
  for (const Node* n = &node; n != nullptr; n = n->parent) {
    if (n->is_element() && n->attribute(attribute)) return true;
  }
  return false;
}

}  // namespace detox::html

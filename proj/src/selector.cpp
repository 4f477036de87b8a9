#include "detox/selector.hpp"

#include <algorithm>

#include "detox/errors.hpp"
#include "detox/text_util.hpp"

namespace detox::html {

namespace {

bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
         c == '_' || static_cast<unsigned char>(c) >= 0x80;
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  std::vector<Selector::Complex> run() {
    std::vector<Selector::Complex> out;
    skip_space();
    if (at_end()) fail("empty selector");
    while (true) {
      out.push_back(complex());
      skip_space();
      if (at_end()) break;
      if (s_[i_] != ',') fail("unexpected character");
      ++i_;
      skip_space();
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("selector '" + std::string(s_) + "': " + why + " at offset " +
                     std::to_string(i_));
  }

  bool at_end() const { return i_ >= s_.size(); }

  void skip_space() {
    while (!at_end() && is_ascii_space(s_[i_])) ++i_;
  }

  std::string ident() {
    const std::size_t from = i_;
    while (!at_end() && is_ident_char(s_[i_])) ++i_;
    if (i_ == from) fail("expected identifier");
    return std::string(s_.substr(from, i_ - from));
  }

  Selector::Complex complex() {
    Selector::Complex c;
    c.compounds.push_back(compound());
    while (true) {
      const std::size_t before = i_;
      skip_space();
      if (at_end() || s_[i_] == ',') break;
      Selector::Combinator comb = Selector::Combinator::Descendant;
      if (s_[i_] == '>') {
        comb = Selector::Combinator::Child;
        ++i_;
        skip_space();
      } else if (i_ == before) {
        fail("unexpected character");
      }
      c.combinators.push_back(comb);
      c.compounds.push_back(compound());
    }
    return c;
  }

  Selector::Compound compound() {
    Selector::Compound c;
    bool any = false;
    if (!at_end() && s_[i_] == '*') {
      ++i_;
      any = true;
    } else if (!at_end() && is_ident_char(s_[i_])) {
      c.tag = ascii_lower(ident());
      any = true;
    }
    while (!at_end()) {
      const char ch = s_[i_];
      if (ch == '.') {
        ++i_;
        c.classes.push_back(ident());
      } else if (ch == '#') {
        ++i_;
        c.id = ident();
      } else if (ch == '[') {
        ++i_;
        c.attrs.push_back(attribute());
      } else if (ch == ':') {
        fail("pseudo-classes are not supported");
      } else {
        break;
      }
      any = true;
    }
    if (!any) fail("expected simple selector");
    return c;
  }

  Selector::AttrTest attribute() {
    Selector::AttrTest t;
    skip_space();
    t.name = ascii_lower(ident());
    skip_space();
    if (at_end()) fail("unterminated attribute test");
    if (s_[i_] == ']') {
      ++i_;
      return t;
    }
    switch (s_[i_]) {
      case '=': t.op = Selector::AttrOp::Equals; break;
      case '~': t.op = Selector::AttrOp::Includes; break;
      case '^': t.op = Selector::AttrOp::Prefix; break;
      case '$': t.op = Selector::AttrOp::Suffix; break;
      case '*': t.op = Selector::AttrOp::Substring; break;
      default: fail("unknown attribute operator");
    }
    ++i_;
    if (t.op != Selector::AttrOp::Equals) {
      if (at_end() || s_[i_] != '=') fail("expected '='");
      ++i_;
    }
    skip_space();
    if (at_end()) fail("missing attribute value");
    if (s_[i_] == '"' || s_[i_] == '\'') {
      const char q = s_[i_++];
      const auto close = s_.find(q, i_);
      if (close == std::string_view::npos) fail("unterminated string");
      t.value = std::string(s_.substr(i_, close - i_));
      i_ = close + 1;
    } else {
      t.value = ident();
    }
    skip_space();
    if (at_end() || s_[i_] != ']') fail("expected ']'");
    ++i_;
    return t;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

bool attr_matches(const Node& el, const Selector::AttrTest& t) {
  const auto v = el.attribute(t.name);
  if (!v) return false;
  const std::string_view value = *v;
  switch (t.op) {
    case Selector::AttrOp::Exists:
      return true;
    case Selector::AttrOp::Equals:
      return value == t.value;
    case Selector::AttrOp::Includes: {
      std::size_t i = 0;
      while (i < value.size()) {
        while (i < value.size() && is_ascii_space(value[i])) ++i;
        std::size_t j = i;
        while (j < value.size() && !is_ascii_space(value[j])) ++j;
        if (j > i && value.substr(i, j - i) == t.value) return true;
        i = j;
      }
      return false;
    }
    case Selector::AttrOp::Prefix:
      return !t.value.empty() && value.starts_with(t.value);
    case Selector::AttrOp::Suffix:
      return !t.value.empty() && value.ends_with(t.value);
    case Selector::AttrOp::Substring:
      return !t.value.empty() && value.find(t.value) != std::string_view::npos;
  }
  return false;
}

bool compound_matches(const Node& el, const Selector::Compound& c) {
  if (!el.is_element()) return false;
  if (!c.tag.empty() && el.tag != c.tag) return false;
  if (!c.id.empty()) {
    const auto id = el.attribute("id");
    if (!id || *id != c.id) return false;
  }
  for (const auto& cls : c.classes) {
    if (!el.has_class(cls)) return false;
  }
  return std::all_of(c.attrs.begin(), c.attrs.end(),
                     [&](const auto& t) { return attr_matches(el, t); });
}

// Right-to-left match of compounds[0..=k] ending at `el`.
bool complex_matches(const Node& el, const Selector::Complex& c, std::size_t k) {
  if (!compound_matches(el, c.compounds[k])) return false;
  if (k == 0) return true;
  const auto comb = c.combinators[k - 1];
  for (const Node* p = el.parent; p != nullptr && p->is_element(); p = p->parent) {
    if (complex_matches(*p, c, k - 1)) return true;
    if (comb == Selector::Combinator::Child) return false;
  }
  return false;
}

}  // namespace

Selector Selector::parse(std::string_view text) {
  Selector sel;
  sel.text_ = std::string(trim(text));
  sel.alternatives_ = Parser(text).run();
  return sel;
}

bool Selector::matches(const Node& element) const {
  return std::any_of(alternatives_.begin(), alternatives_.end(), [&](const Complex& c) {
    return complex_matches(element, c, c.compounds.size() - 1);
  });
}

std::vector<const Node*> select_all(const Node& scope, const Selector& selector) {
  std::vector<const Node*> out;
  std::vector<const Node*> pending(scope.children.rbegin(), scope.children.rend());
  while (!pending.empty()) {
    const Node* n = pending.back();
    pending.pop_back();
    if (n->is_element() && selector.matches(*n)) out.push_back(n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) pending.push_back(*it);
  }
  return out;
}

const Node* select_first(const Node& scope, const Selector& selector) {
  std::vector<const Node*> pending(scope.children.rbegin(), scope.children.rend());
  while (!pending.empty()) {
    const Node* n = pending.back();
    pending.pop_back();
    if (n->is_element() && selector.matches(*n)) return n;
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) pending.push_back(*it);
  }
  return nullptr;
}

}  // namespace detox::html

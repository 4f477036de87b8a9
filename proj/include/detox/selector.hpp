#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "detox/html.hpp"

namespace detox::html {

/// CSS selector subset: type (`div`, `*`), `.class`, `#id`, attribute tests
/// (`[a]`, `[a=v]`, `[a~=v]`, `[a^=v]`, `[a$=v]`, `[a*=v]`), descendant and
/// child (`>`) combinators, and comma-separated selector lists.
class Selector {
 public:
  /// Throws ParseError describing the offending position.
  static Selector parse(std::string_view text);

  bool matches(const Node& element) const;
  const std::string& text() const noexcept { return text_; }

  enum class AttrOp { Exists, Equals, Includes, Prefix, Suffix, Substring };

  struct AttrTest {
    std::string name;
    AttrOp op = AttrOp::Exists;
    std::string value;
  };

  struct Compound {
    std::string tag;  // empty means any
    std::string id;
    std::vector<std::string> classes;
    std::vector<AttrTest> attrs;
  };

  enum class Combinator { Descendant, Child };

  /// compounds[0] is the leftmost; combinators[i] joins compounds[i] and [i+1].
  struct Complex {
    std::vector<Compound> compounds;
    std::vector<Combinator> combinators;
  };

 private:
  std::string text_;
  std::vector<Complex> alternatives_;
};

/// Descendants of `scope` (excluding scope itself) matching `selector`, in
/// document order.
std::vector<const Node*> select_all(const Node& scope, const Selector& selector);
const Node* select_first(const Node& scope, const Selector& selector);

}  // namespace detox::html

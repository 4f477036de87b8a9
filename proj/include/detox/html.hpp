#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace detox::html {

enum class NodeKind { Document, Element, Text, Comment };

struct Attribute {
  std::string name;   // lowercase
  std::string value;  // entity-decoded
};

/// A parsed node together with its byte span in the source document.
/// For elements, [begin, end) covers the start tag through the end tag (or
/// to wherever the element was implicitly closed) and [begin, open_end)
/// is the start tag alone.
struct Node {
  NodeKind kind = NodeKind::Element;
  std::string tag;
  std::vector<Attribute> attributes;
  std::string text;  // decoded character data for Text nodes
  const Node* parent = nullptr;
  std::vector<const Node*> children;
  std::size_t begin = 0;
  std::size_t open_end = 0;
  std::size_t end = 0;

  bool is_element() const noexcept { return kind == NodeKind::Element; }
  std::optional<std::string_view> attribute(std::string_view name) const;
  bool has_class(std::string_view cls) const;
};

/// Lenient HTML parse: unclosed elements end where their parent ends,
/// stray end tags are ignored, <p>/<li>/<td>-style implied ends are honored,
/// and script/style contents are raw text.
class Document {
 public:
  static Document parse(std::string source);

  const Node& root() const noexcept { return *nodes_.front(); }
  std::string_view source() const noexcept { return source_; }
  std::string_view outer_html(const Node& node) const {
    return std::string_view(source_).substr(node.begin, node.end - node.begin);
  }

  /// Every element in document (pre-)order.
  std::vector<const Node*> elements() const;

 private:
  std::string source_;
  std::vector<std::unique_ptr<Node>> nodes_;
};

/// Depth-first concatenation of descendant text, skipping script and style
/// subtrees, with whitespace runs collapsed to one space and trimmed.
std::string extract_text(const Node& node);

std::string decode_entities(std::string_view raw);
std::string escape_attribute(std::string_view value);
std::string escape_text(std::string_view value);

/// True if `text` looks like markup rather than plain text.
bool looks_like_html(std::string_view text);

/// `node` or one of its ancestors carries `attribute`.
bool self_or_ancestor_has(const Node& node, std::string_view attribute);

}  // namespace detox::html

#pragma once

#include <map>
#include <string>
#include <vector>

#include "xmlcrdt/document.hpp"

namespace xmlcrdt {

/// Application-facing projection of the model: no tombstones, no
/// histories, exactly one value per attribute.
struct RenderedNode {
  enum class Kind { element, text };
  Kind kind = Kind::element;
  std::string content;  // tag name for elements, content for text nodes
  std::map<std::string, std::string> attrs;  // elements only; sorted by name
  std::vector<RenderedNode> children;        // elements only

  static RenderedNode element(std::string tag) {
    RenderedNode n;
    n.kind = Kind::element;
    n.content = std::move(tag);
    return n;
  }
  static RenderedNode text(std::string content) {
    RenderedNode n;
    n.kind = Kind::text;
    n.content = std::move(content);
    return n;
  }

  friend bool operator==(const RenderedNode&, const RenderedNode&) = default;
};

/// An edge is visible iff its @add entry has effect >= 1 and every @del
/// entry has effect <= 0. Edges without an @add entry (orphan
/// tombstones) are never visible.
bool is_visible(const Edge& e);

/// True iff the edge appears in the rendered document: itself and every
/// ancestor up to the root visible. This is the precondition for editing
/// an edge locally; content that is unreachable at every replica may be
/// garbage-collected, so no new operation may target it.
bool is_reachably_visible(const Document& d, const Timestamp& id);

/// Current value of an attribute: the newest entry with effect > 0.
/// Returns nullptr when no entry qualifies; a non-null entry may still
/// hold a nil value, which renders as "attribute absent".
const AttrValue* current_value_entry(const ValueHistory& h);

/// Convenience: the current non-nil value, or nullopt if the attribute
/// is unset, deleted, or fully undone.
std::optional<std::string> current_attribute_value(const ValueHistory& h);

/// Projects the document. The synthetic root renders as a "root"
/// element; invisible edges are pruned with their subtrees; children are
/// ordered by (current @position, identifier).
RenderedNode render(const Document& d);

/// Canonical UTF-8 XML: attributes sorted by name, no insignificant
/// whitespace, empty elements self-closed. This byte string is the
/// equality surface for every convergence check.
std::string serialize(const RenderedNode& n);

}  // namespace xmlcrdt

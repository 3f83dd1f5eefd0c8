#include "xmlcrdt/render.hpp"

#include <algorithm>

#include "xmlcrdt/position.hpp"

namespace xmlcrdt {

bool is_visible(const Edge& e) {
  const ValueHistory* add = e.history(kAttrAdd);
  if (!add || add->entries.empty()) return false;
  if (add->entries.front().effect < 1) return false;
  if (const ValueHistory* del = e.history(kAttrDel)) {
    for (const AttrValue& v : del->entries) {
      if (v.effect > 0) return false;
    }
  }
  return true;
}

bool is_reachably_visible(const Document& d, const Timestamp& id) {
  Timestamp cur = id;
  // Walk the parent chain; bounded by the tree height, and a cycle is
  // impossible because parents are fixed at creation.
  while (cur != kRootId) {
    const Edge* e = d.find(cur);
    if (!e || !e->parent || !is_visible(*e)) return false;
    cur = *e->parent;
  }
  return true;
}

const AttrValue* current_value_entry(const ValueHistory& h) {
  // Entries are newest-first; the first effective one wins.
  for (const AttrValue& v : h.entries) {
    if (v.effect > 0) return &v;
  }
  return nullptr;
}

std::optional<std::string> current_attribute_value(const ValueHistory& h) {
  const AttrValue* v = current_value_entry(h);
  if (!v) return std::nullopt;
  return v->value;  // nullopt here means "deleted", same as absent
}

namespace {

struct OrderedChild {
  Position position;  // empty path when @position has no current value
  Timestamp id;
  RenderedNode node;
};

std::optional<RenderedNode> render_edge(const Document& d, const Edge& e);

std::vector<RenderedNode> render_children(const Document& d, const Edge& e) {
  std::vector<OrderedChild> ordered;
  for (const Timestamp& cid : e.children) {
    const Edge* child = d.find(cid);
    if (!child) continue;
    auto node = render_edge(d, *child);
    if (!node) continue;
    Position pos;
    if (const ValueHistory* h = child->history(kAttrPosition)) {
      if (auto text = current_attribute_value(*h)) {
        pos = decode_position(*text);
      }
    }
    ordered.push_back({std::move(pos), cid, std::move(*node)});
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const OrderedChild& a, const OrderedChild& b) {
              if (a.position != b.position) return a.position < b.position;
              return a.id < b.id;  // tie-break keeps the order total
            });
  std::vector<RenderedNode> out;
  out.reserve(ordered.size());
  for (auto& c : ordered) out.push_back(std::move(c.node));
  return out;
}

std::optional<RenderedNode> render_edge(const Document& d, const Edge& e) {
  if (!is_visible(e)) return std::nullopt;
  if (const ValueHistory* text = e.history(kAttrText)) {
    if (auto v = current_attribute_value(*text)) {
      return RenderedNode::text(*v);
    }
  }
  const ValueHistory* tag = e.history(kAttrTag);
  auto tag_value = tag ? current_attribute_value(*tag) : std::nullopt;
  if (!tag_value) {
    // All tag values undone: suppressing the edge is the only convergent
    // way to keep the output well-formed.
    return std::nullopt;
  }
  RenderedNode node = RenderedNode::element(*tag_value);
  for (const auto& [name, h] : e.attributes) {
    if (is_special_attribute(name)) continue;
    if (auto v = current_attribute_value(h)) {
      node.attrs.emplace(name, *v);
    }
  }
  node.children = render_children(d, e);
  return node;
}

void escape_text(const std::string& in, std::string& out) {
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
}

void escape_attr(const std::string& in, std::string& out) {
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
}

void serialize_into(const RenderedNode& n, std::string& out) {
  if (n.kind == RenderedNode::Kind::text) {
    escape_text(n.content, out);
    return;
  }
  out += '<';
  out += n.content;
  for (const auto& [name, value] : n.attrs) {
    out += ' ';
    out += name;
    out += "=\"";
    escape_attr(value, out);
    out += '"';
  }
  if (n.children.empty()) {
    out += "/>";
    return;
  }
  out += '>';
  for (const RenderedNode& c : n.children) serialize_into(c, out);
  out += "</";
  out += n.content;
  out += '>';
}

}  // namespace

RenderedNode render(const Document& d) {
  RenderedNode root = RenderedNode::element("root");
  root.children = render_children(d, d.root());
  return root;
}

std::string serialize(const RenderedNode& n) {
  std::string out;
  serialize_into(n, out);
  return out;
}

}  // namespace xmlcrdt

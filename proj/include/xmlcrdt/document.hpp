#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "xmlcrdt/history.hpp"
#include "xmlcrdt/timestamp.hpp"

namespace xmlcrdt {

/// Tree node. An edge without a parent is either the root or a detached
/// tombstone (a Del delivered before its Add, or a GC leftover).
struct Edge {
  Timestamp id;
  std::optional<Timestamp> parent;
  std::set<Timestamp> children;
  std::map<std::string, ValueHistory, std::less<>> attributes;

  const ValueHistory* history(std::string_view attr) const {
    auto it = attributes.find(attr);
    return it == attributes.end() ? nullptr : &it->second;
  }
  ValueHistory* history(std::string_view attr) {
    auto it = attributes.find(attr);
    return it == attributes.end() ? nullptr : &it->second;
  }

  bool has_add_entry() const { return history(kAttrAdd) != nullptr; }

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// The whole replicated tree plus an identifier index covering every
/// edge, attached or not.
class Document {
 public:
  Document() {
    Edge root;
    root.id = kRootId;
    index_.emplace(kRootId, std::move(root));
  }

  Edge& root() { return index_.at(kRootId); }
  const Edge& root() const { return index_.at(kRootId); }

  Edge* find(const Timestamp& id) {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &it->second;
  }
  const Edge* find(const Timestamp& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &it->second;
  }

  /// Parent edge of `id`, or nullptr for the root, orphan tombstones and
  /// unknown identifiers.
  Edge* find_father(const Timestamp& id) {
    Edge* e = find(id);
    if (!e || !e->parent) return nullptr;
    return find(*e->parent);
  }
  const Edge* find_father(const Timestamp& id) const {
    return const_cast<Document*>(this)->find_father(id);
  }

  /// Creates an unattached edge. Caller links it into the tree.
  Edge& create_edge(const Timestamp& id) {
    Edge e;
    e.id = id;
    return index_.emplace(id, std::move(e)).first->second;
  }

  void erase(const Timestamp& id) { index_.erase(id); }

  const std::map<Timestamp, Edge>& index() const { return index_; }
  std::map<Timestamp, Edge>& index() { return index_; }

  std::size_t edge_count() const { return index_.size(); }

  /// Total number of stored attribute values, the undo bookkeeping the
  /// garbage collector exists to bound.
  std::size_t value_count() const {
    std::size_t n = 0;
    for (const auto& [id, e] : index_) {
      for (const auto& [name, h] : e.attributes) n += h.entries.size();
    }
    return n;
  }

  friend bool operator==(const Document&, const Document&) = default;

 private:
  std::map<Timestamp, Edge> index_;
};

}  // namespace xmlcrdt

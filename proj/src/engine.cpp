#include "xmlcrdt/engine.hpp"

#include <stdexcept>

#include "xmlcrdt/errors.hpp"

namespace xmlcrdt {

EffectKey effect_key(const Operation& original) {
  switch (original.kind) {
    case OpKind::Add:
      return {original.target, std::string(kAttrAdd), original.ts};
    case OpKind::Del:
      return {original.target, std::string(kAttrDel), original.ts};
    case OpKind::SetAttr:
      return {original.target, original.attr, original.ts};
    default:
      throw std::logic_error("effect_key: undo of undo/redo not supported");
  }
}

namespace {

void attach(Edge& parent, Edge& child) {
  child.parent = parent.id;
  parent.children.insert(child.id);
}

/// Adjusts the effect counter identified by `key` by `delta`.
void increment(Document& d, const EffectKey& key, int delta) {
  Edge* e = d.find(key.edge);
  if (!e) {
    throw CausalityViolationError("increment: unknown edge " +
                                  to_string(key.edge));
  }
  ValueHistory* h = e->history(key.attr);
  AttrValue* v = h ? get_value(*h, key.entry) : nullptr;
  if (!v) {
    throw CausalityViolationError("increment: no entry " +
                                  to_string(key.entry) + " in " + key.attr +
                                  " of " + to_string(key.edge));
  }
  v->effect += delta;
}

}  // namespace

void deliver_add(Document& d, const Operation& op) {
  Edge* parent = d.find(op.parent);
  if (!parent) {
    throw CausalityViolationError("deliver_add: unknown parent " +
                                  to_string(op.parent));
  }
  Edge* e = d.find(op.target);
  if (e) {
    // The target exists only as an orphan tombstone (Del arrived first).
    if (e->has_add_entry() || e->parent) {
      throw DuplicateDeliveryError("deliver_add: edge already added " +
                                   to_string(op.target));
    }
  } else {
    e = &d.create_edge(op.target);
  }
  attach(*parent, *e);
  add_value(e->attributes[std::string(kAttrAdd)],
            {std::nullopt, op.target, 1});
}

void deliver_del(Document& d, const Operation& op) {
  Edge* e = d.find(op.target);
  if (!e) {
    // Tombstone ahead of its Add.
    e = &d.create_edge(op.target);
  }
  add_value(e->attributes[std::string(kAttrDel)], {std::nullopt, op.ts, 1});
}

void deliver_set_attr(Document& d, const Operation& op) {
  Edge* e = d.find(op.target);
  if (!e) {
    throw CausalityViolationError("deliver_set_attr: unknown edge " +
                                  to_string(op.target));
  }
  add_value(e->attributes[op.attr], {op.value, op.ts, 1});
}

void deliver_undo(Document& d, const Operation& op) {
  if (!op.inner) throw std::logic_error("deliver_undo: missing original");
  increment(d, effect_key(*op.inner), -1);
}

void deliver_redo(Document& d, const Operation& op) {
  if (!op.inner) throw std::logic_error("deliver_redo: missing original");
  increment(d, effect_key(*op.inner), +1);
}

void deliver_add_lww(Document& d, const Operation& op) {
  // No Del-before-Add in this mode, so the target can never pre-exist.
  if (d.find(op.target)) {
    throw DuplicateDeliveryError("deliver_add_lww: edge already added " +
                                 to_string(op.target));
  }
  Edge* parent = d.find(op.parent);
  if (!parent) {
    throw CausalityViolationError("deliver_add_lww: unknown parent " +
                                  to_string(op.parent));
  }
  Edge& e = d.create_edge(op.target);
  attach(*parent, e);
  add_value(e.attributes[std::string(kAttrAdd)], {std::nullopt, op.target, 1});
}

void deliver_del_lww(Document& d, const Operation& op) {
  Edge* e = d.find(op.target);
  if (!e || e->id == kRootId) {
    throw CausalityViolationError("deliver_del_lww: unknown edge " +
                                  to_string(op.target));
  }
  if (e->parent) {
    if (Edge* p = d.find(*e->parent)) p->children.erase(e->id);
  }
  // Discard the whole subtree.
  std::vector<Timestamp> stack{e->id};
  while (!stack.empty()) {
    Timestamp id = stack.back();
    stack.pop_back();
    if (Edge* cur = d.find(id)) {
      for (const Timestamp& c : cur->children) stack.push_back(c);
      d.erase(id);
    }
  }
}

void deliver_set_attr_lww(Document& d, const Operation& op) {
  Edge* e = d.find(op.target);
  if (!e) {
    throw CausalityViolationError("deliver_set_attr_lww: unknown edge " +
                                  to_string(op.target));
  }
  ValueHistory& h = e->attributes[op.attr];
  if (h.entries.empty()) {
    h.entries.push_back({op.value, op.ts, 1});
  } else if (h.entries.front().timestamp < op.ts) {
    h.entries.front() = {op.value, op.ts, 1};
  }
  // Stale write: dropped.
}

void deliver(Document& d, const Operation& op, Mode mode) {
  if (mode == Mode::lww) {
    switch (op.kind) {
      case OpKind::Add: return deliver_add_lww(d, op);
      case OpKind::Del: return deliver_del_lww(d, op);
      case OpKind::SetAttr: return deliver_set_attr_lww(d, op);
      case OpKind::Undo:
      case OpKind::Redo:
        throw std::logic_error("deliver: undo/redo not available in lww mode");
    }
  }
  switch (op.kind) {
    case OpKind::Add: return deliver_add(d, op);
    case OpKind::Del: return deliver_del(d, op);
    case OpKind::SetAttr: return deliver_set_attr(d, op);
    case OpKind::Undo: return deliver_undo(d, op);
    case OpKind::Redo: return deliver_redo(d, op);
  }
  throw std::logic_error("deliver: unknown operation kind");
}

}  // namespace xmlcrdt

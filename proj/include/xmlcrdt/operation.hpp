#pragma once

#include <memory>
#include <optional>
#include <string>

#include "xmlcrdt/timestamp.hpp"

namespace xmlcrdt {

enum class OpKind { Add, Del, SetAttr, Undo, Redo };

/// A replicated editing operation. Undo/Redo embed the full original
/// operation so any replica can locate the affected history entry
/// without keeping an operation log.
struct Operation {
  OpKind kind = OpKind::Add;
  Timestamp ts;       // this operation's own timestamp
  Timestamp target;   // edge id (Add: equals ts)
  Timestamp parent;   // Add only
  std::string attr;   // SetAttr only
  std::optional<std::string> value;  // SetAttr only; nullopt = nil
  std::shared_ptr<const Operation> inner;  // Undo/Redo only

  static Operation add(Timestamp parent, Timestamp id) {
    Operation op;
    op.kind = OpKind::Add;
    op.ts = id;
    op.target = id;
    op.parent = parent;
    return op;
  }
  static Operation del(Timestamp target, Timestamp ts) {
    Operation op;
    op.kind = OpKind::Del;
    op.ts = ts;
    op.target = target;
    return op;
  }
  static Operation set_attr(Timestamp target, std::string attr,
                            std::optional<std::string> value, Timestamp ts) {
    Operation op;
    op.kind = OpKind::SetAttr;
    op.ts = ts;
    op.target = target;
    op.attr = std::move(attr);
    op.value = std::move(value);
    return op;
  }
  static Operation undo(Operation original, Timestamp ts) {
    Operation op;
    op.kind = OpKind::Undo;
    op.ts = ts;
    op.target = original.target;
    op.inner = std::make_shared<const Operation>(std::move(original));
    return op;
  }
  static Operation redo(Operation original, Timestamp ts) {
    Operation op;
    op.kind = OpKind::Redo;
    op.ts = ts;
    op.target = original.target;
    op.inner = std::make_shared<const Operation>(std::move(original));
    return op;
  }
};

/// Where an Undo/Redo's effect counter lives: (edge, attribute, entry
/// timestamp) of the original operation.
struct EffectKey {
  Timestamp edge;
  std::string attr;
  Timestamp entry;
};

/// Resolves the history entry affected by undoing/redoing `original`.
EffectKey effect_key(const Operation& original);

}  // namespace xmlcrdt

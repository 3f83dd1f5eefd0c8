#pragma once

#include "xmlcrdt/document.hpp"
#include "xmlcrdt/operation.hpp"

namespace xmlcrdt {

/// Conflict model for a document instance. `lww` is the plain
/// last-writer-wins variant without undo; `undo` keeps value histories
/// and effect counters. The two must not be mixed on one document.
enum class Mode { lww, undo };

/// Loosely synchronized per-replica clock.
struct ReplicaClock {
  std::uint32_t site = 0;
  std::uint64_t clock = 0;
};

/// Advances the clock and returns a fresh, globally unique timestamp.
inline Timestamp tick(ReplicaClock& c) {
  ++c.clock;
  return {c.clock, c.site};
}

/// On receipt of any remote timestamp: clock = max(local, remote).
inline void sync_clock(ReplicaClock& c, const Timestamp& remote) {
  if (remote.clock > c.clock) c.clock = remote.clock;
}

// Undo-mode deliveries. All mutate the document in place and throw
// CausalityViolationError / DuplicateDeliveryError on contract breaches.
void deliver_add(Document& d, const Operation& op);
void deliver_del(Document& d, const Operation& op);
void deliver_set_attr(Document& d, const Operation& op);
void deliver_undo(Document& d, const Operation& op);
void deliver_redo(Document& d, const Operation& op);

// LWW-mode deliveries (no histories beyond single entries, no
// tombstones for edges).
void deliver_add_lww(Document& d, const Operation& op);
void deliver_del_lww(Document& d, const Operation& op);
void deliver_set_attr_lww(Document& d, const Operation& op);

/// Mode-dispatching entry point. Undo/Redo in lww mode is a
/// configuration error.
void deliver(Document& d, const Operation& op, Mode mode);

}  // namespace xmlcrdt

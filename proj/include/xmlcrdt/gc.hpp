#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "xmlcrdt/document.hpp"
#include "xmlcrdt/timestamp.hpp"

namespace xmlcrdt {

/// Per-replica garbage-collection bookkeeping: v holds the last clock
/// received from every replica (own included), V the last announced
/// minimum from every replica. min(V) is the purge horizon M; replicas
/// announce min(v) - k so the k most recent operations always stay
/// undoable.
class GcState {
 public:
  GcState() = default;
  GcState(std::uint32_t site, const std::vector<std::uint32_t>& all_sites,
          std::uint64_t k);

  std::uint32_t site() const { return site_; }
  std::uint64_t k() const { return k_; }

  /// Records an operation (or locally generated) clock from `from`.
  /// Throws FifoViolationError on clock regression.
  void observe_operation(std::uint32_t from, std::uint64_t clock);

  /// min(v). Defined from the start; entries begin at 0.
  std::uint64_t min_received() const;

  /// Value to announce: min(v) - k (may be negative). Also applies it to
  /// the replica's own V entry.
  std::int64_t broadcast_minimum();

  /// Records a minimum announced by `from`.
  /// Throws FifoViolationError on regression.
  void receive_minimum(std::uint32_t from, std::int64_t value);

  /// Purge horizon M = min(V), or nullopt until every known replica has
  /// announced at least once. Purging is disabled while undefined.
  std::optional<std::int64_t> horizon() const;

  /// Authorization gate for locally generating an Undo/Redo of the
  /// operation with timestamp ts: its clock must exceed min(v) - k.
  /// Delivery of remote undos is never gated.
  bool can_undo(const Timestamp& ts) const;

  const std::map<std::uint32_t, std::uint64_t>& clock_vector() const {
    return v_;
  }
  const std::map<std::uint32_t, std::int64_t>& minima_vector() const {
    return big_v_;
  }

 private:
  std::uint32_t site_ = 0;
  std::uint64_t k_ = 0;
  std::set<std::uint32_t> all_sites_;
  std::map<std::uint32_t, std::uint64_t> v_;
  std::map<std::uint32_t, std::int64_t> big_v_;  // only sites heard from
};

struct PurgeStats {
  std::size_t values_removed = 0;
  std::size_t attributes_removed = 0;
  std::size_t edges_removed = 0;

  std::size_t total() const {
    return values_removed + attributes_removed + edges_removed;
  }
};

/// Applies the four purge rules with horizon M. Comparisons are on the
/// clock component, strictly below M. Never changes the rendered
/// document; idempotent for a fixed M.
PurgeStats purge(Document& d, std::int64_t M);

}  // namespace xmlcrdt

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "xmlcrdt/engine.hpp"
#include "xmlcrdt/gc.hpp"
#include "xmlcrdt/operation.hpp"

namespace xmlcrdt::sim {

/// In-simulator wire unit: an operation or a GC heartbeat. Operation
/// messages piggyback the sender's announced minimum when GC tracking is
/// on.
struct Message {
  enum class Kind { op, heartbeat };
  Kind kind = Kind::op;
  std::uint32_t from = 0;
  Operation op;
  std::optional<std::int64_t> minimum;
};

/// Point-to-point queue. FIFO channels dequeue strictly in order; a
/// non-FIFO channel lets the scheduler pick any deliverable message.
struct Channel {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  std::deque<Message> queue;
  bool fifo = true;
};

struct Replica {
  ReplicaClock clock;
  Document doc;
  GcState gc;
  Mode mode = Mode::undo;

  // Clock-safety instrumentation: every locally generated timestamp must
  // exceed everything this replica has seen.
  Timestamp max_seen{0, 0};
  std::uint32_t clock_violations = 0;

  // Harness-side knowledge of operations this replica has generated or
  // received, for building undo/redo payloads. Not part of the CRDT.
  std::map<Timestamp, Operation> known_ops;

  // lww mode only: ids physically removed by a delivered Del (plus Adds
  // discarded under them). Operations racing a delete target these ids;
  // they are accepted and dropped, the mode's documented data loss.
  std::set<Timestamp> lww_discarded;

  std::uint32_t site() const { return clock.site; }
};

/// Deterministic multi-replica harness. Sites are numbered 1..replicas.
/// The scheduler enforces the causal-delivery contract by holding back a
/// message until its prerequisites have been delivered.
class Simulation {
 public:
  struct Config {
    std::uint32_t replicas = 2;
    Mode mode = Mode::undo;
    std::uint64_t k = 0;
    bool fifo = true;
    bool track_gc = true;  // requires FIFO channels
  };

  explicit Simulation(const Config& cfg);

  const Config& config() const { return cfg_; }
  std::uint32_t replica_count() const {
    return static_cast<std::uint32_t>(replicas_.size());
  }
  Replica& replica(std::uint32_t site);
  const Replica& replica(std::uint32_t site) const;
  std::vector<std::uint32_t> sites() const;

  // ---- local generation ----
  // Each call ticks the site's clock, applies the operation(s) locally
  // and enqueues them on every outgoing channel. All throw
  // GenerationRejectedError when the action's guard fails.

  /// Bare Add with no attributes (the edge stays invisible until it gets
  /// a tag or text). Returns the new edge id.
  Timestamp local_add_raw(std::uint32_t site, Timestamp parent);

  /// Element insertion: Add plus @position and @tag SetAttrs (3 ops).
  /// `after` is the sibling to insert after, nullopt for the start.
  Timestamp local_add(std::uint32_t site, Timestamp parent,
                      std::optional<Timestamp> after, const std::string& tag);

  /// Text insertion: Add plus @position and @text SetAttrs (3 ops).
  Timestamp local_text(std::uint32_t site, Timestamp parent,
                       std::optional<Timestamp> after,
                       const std::string& value);

  /// Delete of a locally visible edge. Returns the Del's timestamp.
  Timestamp local_del(std::uint32_t site, Timestamp target);

  Timestamp local_set_attr(std::uint32_t site, Timestamp target,
                           const std::string& attr,
                           std::optional<std::string> value);

  /// Undo/Redo of a previously seen operation, gated by the local effect
  /// counter and by GcState::can_undo.
  Timestamp local_undo(std::uint32_t site, Timestamp op_ts);
  Timestamp local_redo(std::uint32_t site, Timestamp op_ts);

  // ---- delivery ----
  enum class Outcome { delivered, held, empty };

  bool deliverable(const Replica& r, const Message& m) const;
  Outcome deliver_next(std::uint32_t from, std::uint32_t to);
  /// Delivers one message on a randomly chosen channel; false when
  /// nothing is deliverable anywhere.
  bool deliver_one_random(std::mt19937_64& rng);
  /// Drains every channel to quiescence. Throws if messages remain but
  /// none is deliverable (broken causal contract).
  std::size_t deliver_all();
  std::size_t pending_messages() const;
  bool quiescent() const { return pending_messages() == 0; }

  // ---- gc ----
  /// Broadcasts the site's current minimum on every outgoing channel.
  std::int64_t heartbeat(std::uint32_t site);
  /// Purges with the site's current horizon; no-op while undefined.
  PurgeStats purge_replica(std::uint32_t site);

  std::string render_site(std::uint32_t site) const;
  bool converged() const;

  std::uint32_t total_clock_violations() const;

 private:
  Replica& replica_ref(std::uint32_t site);
  Timestamp commit(Replica& r, Operation op);
  void note_seen(Replica& r, const Timestamp& ts);
  void apply_message(Replica& r, const Message& m);
  Channel& channel(std::uint32_t from, std::uint32_t to);
  void broadcast(std::uint32_t from, const Message& m);

  Config cfg_;
  std::vector<Replica> replicas_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, Channel> channels_;
};

}  // namespace xmlcrdt::sim

#include "xmlcrdt/sim/simulator.hpp"

#include <algorithm>
#include <stdexcept>

#include "xmlcrdt/errors.hpp"
#include "xmlcrdt/position.hpp"
#include "xmlcrdt/render.hpp"

namespace xmlcrdt::sim {

Simulation::Simulation(const Config& cfg) : cfg_(cfg) {
  if (cfg_.replicas == 0) {
    throw std::invalid_argument("Simulation: need at least one replica");
  }
  if (cfg_.track_gc && !cfg_.fifo) {
    throw std::invalid_argument(
        "Simulation: GC tracking requires FIFO channels");
  }
  std::vector<std::uint32_t> all_sites;
  for (std::uint32_t s = 1; s <= cfg_.replicas; ++s) all_sites.push_back(s);
  replicas_.resize(cfg_.replicas);
  for (std::uint32_t s = 1; s <= cfg_.replicas; ++s) {
    Replica& r = replicas_[s - 1];
    r.clock = {s, 0};
    r.mode = cfg_.mode;
    r.gc = GcState(s, all_sites, cfg_.k);
  }
  for (std::uint32_t a = 1; a <= cfg_.replicas; ++a) {
    for (std::uint32_t b = 1; b <= cfg_.replicas; ++b) {
      if (a == b) continue;
      channels_[{a, b}] = Channel{a, b, {}, cfg_.fifo};
    }
  }
}

Replica& Simulation::replica_ref(std::uint32_t site) {
  if (site == 0 || site > replicas_.size()) {
    throw std::out_of_range("Simulation: unknown site " +
                            std::to_string(site));
  }
  return replicas_[site - 1];
}

Replica& Simulation::replica(std::uint32_t site) { return replica_ref(site); }
const Replica& Simulation::replica(std::uint32_t site) const {
  return const_cast<Simulation*>(this)->replica_ref(site);
}

std::vector<std::uint32_t> Simulation::sites() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 1; s <= replica_count(); ++s) out.push_back(s);
  return out;
}

Channel& Simulation::channel(std::uint32_t from, std::uint32_t to) {
  auto it = channels_.find({from, to});
  if (it == channels_.end()) {
    throw std::out_of_range("Simulation: no channel " + std::to_string(from) +
                            "->" + std::to_string(to));
  }
  return it->second;
}

void Simulation::broadcast(std::uint32_t from, const Message& m) {
  for (auto& [key, ch] : channels_) {
    if (key.first == from) ch.queue.push_back(m);
  }
}

void Simulation::note_seen(Replica& r, const Timestamp& ts) {
  if (ts > r.max_seen) r.max_seen = ts;
}

namespace {

/// Records every id in the subtree a lww Del is about to remove, so ops
/// that raced the delete can be recognized and dropped on arrival.
void note_lww_removal(Replica& r, const Timestamp& target) {
  const Edge* e = r.doc.find(target);
  if (!e) return;
  r.lww_discarded.insert(target);
  for (const Timestamp& cid : e->children) note_lww_removal(r, cid);
}

/// True when a lww-mode operation targets content a delivered Del has
/// already removed here. Such a message is consumed without applying:
/// concurrent edits under a deleted subtree are lost in this mode.
bool lww_drops(Replica& r, const Operation& op) {
  if (r.mode != Mode::lww) return false;
  switch (op.kind) {
    case OpKind::Add:
      if (r.lww_discarded.contains(op.parent)) {
        r.lww_discarded.insert(op.ts);  // children of this Add race too
        return true;
      }
      return false;
    case OpKind::Del:
    case OpKind::SetAttr:
      return r.lww_discarded.contains(op.target);
    default:
      return false;
  }
}

}  // namespace

Timestamp Simulation::commit(Replica& r, Operation op) {
  if (!(op.ts > r.max_seen)) ++r.clock_violations;
  note_seen(r, op.ts);
  if (r.mode == Mode::lww && op.kind == OpKind::Del) {
    note_lww_removal(r, op.target);
  }
  deliver(r.doc, op, r.mode);
  if (op.kind != OpKind::Undo && op.kind != OpKind::Redo) {
    r.known_ops.emplace(op.ts, op);
  }
  Message m;
  m.kind = Message::Kind::op;
  m.from = r.site();
  m.op = op;
  if (cfg_.track_gc) {
    r.gc.observe_operation(r.site(), op.ts.clock);
    m.minimum = r.gc.broadcast_minimum();
  }
  broadcast(r.site(), m);
  return op.ts;
}

Timestamp Simulation::local_add_raw(std::uint32_t site, Timestamp parent) {
  Replica& r = replica_ref(site);
  const Edge* p = r.doc.find(parent);
  if (!p || !is_reachably_visible(r.doc, parent)) {
    throw GenerationRejectedError("add: parent not in the document " +
                                  to_string(parent));
  }
  Timestamp id = tick(r.clock);
  commit(r, Operation::add(parent, id));
  return id;
}

namespace {

/// Siblings of `parent` that currently carry a position, in order.
std::vector<std::pair<Position, Timestamp>> ordered_children(
    const Document& doc, const Edge& parent) {
  std::vector<std::pair<Position, Timestamp>> out;
  for (const Timestamp& cid : parent.children) {
    const Edge* c = doc.find(cid);
    if (!c) continue;
    const ValueHistory* h = c->history(kAttrPosition);
    if (!h) continue;
    if (auto text = current_attribute_value(*h)) {
      out.emplace_back(decode_position(*text), cid);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Position position_between(const Document& doc, const Edge& parent,
                          std::optional<Timestamp> after, std::uint32_t site) {
  auto siblings = ordered_children(doc, parent);
  const Position* left = nullptr;
  const Position* right = nullptr;
  if (after) {
    auto it = std::find_if(siblings.begin(), siblings.end(),
                           [&](const auto& s) { return s.second == *after; });
    if (it == siblings.end()) {
      throw GenerationRejectedError("add: 'after' sibling " +
                                    to_string(*after) + " has no position");
    }
    left = &it->first;
    // Skip any sibling sharing the left position (possible after an
    // undone position write let a slot be reused); the bound must be
    // strictly greater.
    for (auto j = std::next(it); j != siblings.end(); ++j) {
      if (*left < j->first) {
        right = &j->first;
        break;
      }
    }
  } else if (!siblings.empty()) {
    right = &siblings.front().first;
  }
  return generate_position(left, right, site);
}

}  // namespace

Timestamp Simulation::local_add(std::uint32_t site, Timestamp parent,
                                std::optional<Timestamp> after,
                                const std::string& tag) {
  Replica& r = replica_ref(site);
  const Edge* p = r.doc.find(parent);
  if (!p || !is_reachably_visible(r.doc, parent)) {
    throw GenerationRejectedError("add: parent not in the document " +
                                  to_string(parent));
  }
  Position pos = position_between(r.doc, *p, after, site);
  Timestamp id = tick(r.clock);
  commit(r, Operation::add(parent, id));
  Timestamp pos_ts = tick(r.clock);
  commit(r, Operation::set_attr(id, std::string(kAttrPosition),
                                encode_position(pos), pos_ts));
  Timestamp tag_ts = tick(r.clock);
  commit(r, Operation::set_attr(id, std::string(kAttrTag), tag, tag_ts));
  return id;
}

Timestamp Simulation::local_text(std::uint32_t site, Timestamp parent,
                                 std::optional<Timestamp> after,
                                 const std::string& value) {
  Replica& r = replica_ref(site);
  const Edge* p = r.doc.find(parent);
  if (!p || !is_reachably_visible(r.doc, parent)) {
    throw GenerationRejectedError("text: parent not in the document " +
                                  to_string(parent));
  }
  Position pos = position_between(r.doc, *p, after, site);
  Timestamp id = tick(r.clock);
  commit(r, Operation::add(parent, id));
  Timestamp pos_ts = tick(r.clock);
  commit(r, Operation::set_attr(id, std::string(kAttrPosition),
                                encode_position(pos), pos_ts));
  Timestamp text_ts = tick(r.clock);
  commit(r, Operation::set_attr(id, std::string(kAttrText), value, text_ts));
  return id;
}

Timestamp Simulation::local_del(std::uint32_t site, Timestamp target) {
  Replica& r = replica_ref(site);
  const Edge* e = r.doc.find(target);
  if (!e || target == kRootId || !is_reachably_visible(r.doc, target)) {
    throw GenerationRejectedError("del: edge not in the document " +
                                  to_string(target));
  }
  Timestamp ts = tick(r.clock);
  commit(r, Operation::del(target, ts));
  return ts;
}

Timestamp Simulation::local_set_attr(std::uint32_t site, Timestamp target,
                                     const std::string& attr,
                                     std::optional<std::string> value) {
  Replica& r = replica_ref(site);
  const Edge* e = r.doc.find(target);
  if (!e || target == kRootId || !is_reachably_visible(r.doc, target)) {
    throw GenerationRejectedError("setattr: edge not in the document " +
                                  to_string(target));
  }
  Timestamp ts = tick(r.clock);
  commit(r, Operation::set_attr(target, attr, std::move(value), ts));
  return ts;
}

Timestamp Simulation::local_undo(std::uint32_t site, Timestamp op_ts) {
  Replica& r = replica_ref(site);
  if (r.mode != Mode::undo) {
    throw GenerationRejectedError("undo: not available in lww mode");
  }
  auto it = r.known_ops.find(op_ts);
  if (it == r.known_ops.end()) {
    throw GenerationRejectedError("undo: unknown operation " +
                                  to_string(op_ts));
  }
  if (cfg_.track_gc && !r.gc.can_undo(op_ts)) {
    throw GenerationRejectedError("undo: outside authorization window " +
                                  to_string(op_ts));
  }
  EffectKey key = effect_key(it->second);
  const Edge* e = r.doc.find(key.edge);
  const ValueHistory* h = e ? e->history(key.attr) : nullptr;
  const AttrValue* v = h ? get_value(*h, key.entry) : nullptr;
  if (!v) {
    throw GenerationRejectedError("undo: target entry gone " +
                                  to_string(op_ts));
  }
  if (v->effect <= 0) {
    throw GenerationRejectedError("undo: operation already without effect " +
                                  to_string(op_ts));
  }
  Timestamp ts = tick(r.clock);
  commit(r, Operation::undo(it->second, ts));
  return ts;
}

Timestamp Simulation::local_redo(std::uint32_t site, Timestamp op_ts) {
  Replica& r = replica_ref(site);
  if (r.mode != Mode::undo) {
    throw GenerationRejectedError("redo: not available in lww mode");
  }
  auto it = r.known_ops.find(op_ts);
  if (it == r.known_ops.end()) {
    throw GenerationRejectedError("redo: unknown operation " +
                                  to_string(op_ts));
  }
  if (cfg_.track_gc && !r.gc.can_undo(op_ts)) {
    throw GenerationRejectedError("redo: outside authorization window " +
                                  to_string(op_ts));
  }
  EffectKey key = effect_key(it->second);
  const Edge* e = r.doc.find(key.edge);
  const ValueHistory* h = e ? e->history(key.attr) : nullptr;
  const AttrValue* v = h ? get_value(*h, key.entry) : nullptr;
  if (!v) {
    throw GenerationRejectedError("redo: target entry gone " +
                                  to_string(op_ts));
  }
  if (v->effect > 0) {
    throw GenerationRejectedError("redo: operation still has effect " +
                                  to_string(op_ts));
  }
  Timestamp ts = tick(r.clock);
  commit(r, Operation::redo(it->second, ts));
  return ts;
}

bool Simulation::deliverable(const Replica& r, const Message& m) const {
  if (m.kind == Message::Kind::heartbeat) return true;
  const Operation& op = m.op;
  switch (op.kind) {
    case OpKind::Add: {
      if (r.mode == Mode::lww && r.lww_discarded.contains(op.parent)) {
        return true;  // will be dropped on arrival
      }
      const Edge* p = r.doc.find(op.parent);
      return p && (op.parent == kRootId || p->has_add_entry());
    }
    case OpKind::Del:
      if (r.mode == Mode::undo) return true;  // tombstone ahead of Add is fine
      return r.doc.find(op.target) != nullptr ||
             r.lww_discarded.contains(op.target);
    case OpKind::SetAttr: {
      const Edge* e = r.doc.find(op.target);
      if (r.mode == Mode::lww) {
        return e != nullptr || r.lww_discarded.contains(op.target);
      }
      return e && e->has_add_entry();
    }
    case OpKind::Undo:
    case OpKind::Redo: {
      if (!op.inner) return false;
      EffectKey key = effect_key(*op.inner);
      const Edge* e = r.doc.find(key.edge);
      const ValueHistory* h = e ? e->history(key.attr) : nullptr;
      return h && get_value(*h, key.entry) != nullptr;
    }
  }
  return false;
}

void Simulation::apply_message(Replica& r, const Message& m) {
  if (m.kind == Message::Kind::heartbeat) {
    if (cfg_.track_gc && m.minimum) r.gc.receive_minimum(m.from, *m.minimum);
    return;
  }
  sync_clock(r.clock, m.op.ts);
  note_seen(r, m.op.ts);
  if (lww_drops(r, m.op)) {
    if (cfg_.track_gc) {
      r.gc.observe_operation(m.from, m.op.ts.clock);
      if (m.minimum) r.gc.receive_minimum(m.from, *m.minimum);
    }
    return;
  }
  if (r.mode == Mode::lww && m.op.kind == OpKind::Del) {
    note_lww_removal(r, m.op.target);
  }
  deliver(r.doc, m.op, r.mode);
  if (m.op.kind != OpKind::Undo && m.op.kind != OpKind::Redo) {
    r.known_ops.emplace(m.op.ts, m.op);
  }
  if (cfg_.track_gc) {
    r.gc.observe_operation(m.from, m.op.ts.clock);
    if (m.minimum) r.gc.receive_minimum(m.from, *m.minimum);
  }
}

Simulation::Outcome Simulation::deliver_next(std::uint32_t from,
                                             std::uint32_t to) {
  Channel& ch = channel(from, to);
  if (ch.queue.empty()) return Outcome::empty;
  Replica& r = replica_ref(to);
  if (ch.fifo) {
    if (!deliverable(r, ch.queue.front())) return Outcome::held;
    Message m = std::move(ch.queue.front());
    ch.queue.pop_front();
    apply_message(r, m);
    return Outcome::delivered;
  }
  for (auto it = ch.queue.begin(); it != ch.queue.end(); ++it) {
    if (deliverable(r, *it)) {
      Message m = std::move(*it);
      ch.queue.erase(it);
      apply_message(r, m);
      return Outcome::delivered;
    }
  }
  return Outcome::held;
}

bool Simulation::deliver_one_random(std::mt19937_64& rng) {
  std::vector<const std::pair<const std::pair<std::uint32_t, std::uint32_t>,
                              Channel>*>
      busy;
  for (const auto& entry : channels_) {
    if (!entry.second.queue.empty()) busy.push_back(&entry);
  }
  if (busy.empty()) return false;
  std::shuffle(busy.begin(), busy.end(), rng);
  for (const auto* entry : busy) {
    if (deliver_next(entry->first.first, entry->first.second) ==
        Outcome::delivered) {
      return true;
    }
  }
  return false;
}

std::size_t Simulation::deliver_all() {
  std::size_t delivered = 0;
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto& [key, ch] : channels_) {
      while (deliver_next(key.first, key.second) == Outcome::delivered) {
        ++delivered;
        progress = true;
      }
    }
  }
  if (!quiescent()) {
    throw std::runtime_error(
        "deliver_all: deadlock, undeliverable messages remain");
  }
  return delivered;
}

std::size_t Simulation::pending_messages() const {
  std::size_t n = 0;
  for (const auto& [key, ch] : channels_) n += ch.queue.size();
  return n;
}

std::int64_t Simulation::heartbeat(std::uint32_t site) {
  if (!cfg_.track_gc) {
    throw std::logic_error("heartbeat: GC tracking disabled");
  }
  Replica& r = replica_ref(site);
  const std::int64_t announced = r.gc.broadcast_minimum();
  Message m;
  m.kind = Message::Kind::heartbeat;
  m.from = site;
  m.minimum = announced;
  broadcast(site, m);
  return announced;
}

PurgeStats Simulation::purge_replica(std::uint32_t site) {
  Replica& r = replica_ref(site);
  auto M = r.gc.horizon();
  if (!M) return {};
  return purge(r.doc, *M);
}

std::string Simulation::render_site(std::uint32_t site) const {
  return serialize(render(replica(site).doc));
}

bool Simulation::converged() const {
  const std::string first = render_site(1);
  for (std::uint32_t s = 2; s <= replica_count(); ++s) {
    if (render_site(s) != first) return false;
  }
  return true;
}

std::uint32_t Simulation::total_clock_violations() const {
  std::uint32_t n = 0;
  for (const Replica& r : replicas_) n += r.clock_violations;
  return n;
}

}  // namespace xmlcrdt::sim

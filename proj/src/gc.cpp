#include "xmlcrdt/gc.hpp"

#include <algorithm>

#include "xmlcrdt/errors.hpp"

namespace xmlcrdt {

GcState::GcState(std::uint32_t site,
                 const std::vector<std::uint32_t>& all_sites, std::uint64_t k)
    : site_(site), k_(k), all_sites_(all_sites.begin(), all_sites.end()) {
  for (std::uint32_t s : all_sites_) v_[s] = 0;
}

void GcState::observe_operation(std::uint32_t from, std::uint64_t clock) {
  auto& cur = v_[from];
  if (clock < cur) {
    throw FifoViolationError("observe_operation: clock regression from site " +
                             std::to_string(from));
  }
  cur = clock;
}

std::uint64_t GcState::min_received() const {
  std::uint64_t m = UINT64_MAX;
  for (const auto& [site, clock] : v_) m = std::min(m, clock);
  return v_.empty() ? 0 : m;
}

std::int64_t GcState::broadcast_minimum() {
  const std::int64_t announced =
      static_cast<std::int64_t>(min_received()) - static_cast<std::int64_t>(k_);
  big_v_[site_] = announced;
  return announced;
}

void GcState::receive_minimum(std::uint32_t from, std::int64_t value) {
  auto it = big_v_.find(from);
  if (it != big_v_.end() && value < it->second) {
    throw FifoViolationError("receive_minimum: regression from site " +
                             std::to_string(from));
  }
  big_v_[from] = value;
}

std::optional<std::int64_t> GcState::horizon() const {
  for (std::uint32_t s : all_sites_) {
    if (!big_v_.contains(s)) return std::nullopt;
  }
  std::int64_t m = INT64_MAX;
  for (const auto& [site, value] : big_v_) m = std::min(m, value);
  return m;
}

bool GcState::can_undo(const Timestamp& ts) const {
  return static_cast<std::int64_t>(ts.clock) >
         static_cast<std::int64_t>(min_received()) -
             static_cast<std::int64_t>(k_);
}

namespace {

std::uint64_t max_clock(const Edge& e) {
  std::uint64_t m = e.id.clock;
  for (const auto& [name, h] : e.attributes) {
    for (const AttrValue& v : h.entries) m = std::max(m, v.timestamp.clock);
  }
  return m;
}

bool rule4_eligible(const Edge& e, std::int64_t M) {
  if (const ValueHistory* del = e.history(kAttrDel)) {
    for (const AttrValue& v : del->entries) {
      if (static_cast<std::int64_t>(v.timestamp.clock) < M && v.effect > 0) {
        return true;
      }
    }
  }
  if (const ValueHistory* add = e.history(kAttrAdd)) {
    if (!add->entries.empty()) {
      const AttrValue& a = add->entries.front();
      if (static_cast<std::int64_t>(a.timestamp.clock) < M && a.effect <= 0) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

PurgeStats purge(Document& d, std::int64_t M) {
  PurgeStats stats;
  if (M <= 0) return stats;
  auto below = [M](const Timestamp& ts) {
    return static_cast<std::int64_t>(ts.clock) < M;
  };

  // Rule 4: edges with an effective old delete or an undone old add go
  // away with their subtrees. Subtree members still carrying timestamps
  // at or above M may yet receive undo/redo/set messages, so they are
  // kept detached in the index; their turn comes on a later purge, which
  // also sweeps previously detached leftovers here.
  std::vector<Timestamp> roots;
  for (const auto& [id, e] : d.index()) {
    if (id == kRootId) continue;
    if (rule4_eligible(e, M)) {
      roots.push_back(id);
    } else if (!e.parent && max_clock(e) < static_cast<std::uint64_t>(M)) {
      roots.push_back(id);  // detached and beyond any future reference
    }
  }
  std::set<Timestamp> closure;
  for (const Timestamp& r : roots) {
    std::vector<Timestamp> stack{r};
    while (!stack.empty()) {
      Timestamp id = stack.back();
      stack.pop_back();
      if (!closure.insert(id).second) continue;
      if (const Edge* e = d.find(id)) {
        for (const Timestamp& c : e->children) stack.push_back(c);
      }
    }
  }
  std::set<Timestamp> erased;
  for (const Timestamp& id : closure) {
    if (const Edge* e = d.find(id)) {
      if (max_clock(*e) < static_cast<std::uint64_t>(M)) erased.insert(id);
    }
  }
  // Detach the eligible roots from any parent outside the closure.
  for (const Timestamp& r : roots) {
    if (Edge* e = d.find(r)) {
      if (e->parent) {
        if (Edge* p = d.find(*e->parent)) p->children.erase(r);
        e->parent.reset();
      }
    }
  }
  for (const Timestamp& id : closure) {
    Edge* e = d.find(id);
    if (!e) continue;
    if (erased.contains(id)) continue;
    // Survivor inside a removed subtree: drop links to erased nodes.
    if (e->parent && erased.contains(*e->parent)) e->parent.reset();
    for (auto it = e->children.begin(); it != e->children.end();) {
      it = erased.contains(*it) ? e->children.erase(it) : std::next(it);
    }
  }
  for (const Timestamp& id : erased) {
    d.erase(id);
    ++stats.edges_removed;
  }

  // Rules 1-3 over the remaining edges' histories.
  for (auto& [id, e] : d.index()) {
    for (auto attr_it = e.attributes.begin(); attr_it != e.attributes.end();) {
      auto& [name, h] = *attr_it;
      // Rule 1: old values without effect. Rule 2: old values shadowed by
      // a newer old value that still has effect.
      bool seen_effective_below = false;
      std::vector<AttrValue> kept;
      kept.reserve(h.entries.size());
      for (AttrValue& v : h.entries) {  // newest first
        if (!below(v.timestamp)) {
          kept.push_back(std::move(v));
          continue;
        }
        if (v.effect <= 0 || seen_effective_below) {
          ++stats.values_removed;
          continue;
        }
        seen_effective_below = true;
        kept.push_back(std::move(v));
      }
      h.entries = std::move(kept);
      // Rule 3: attributes that can never contribute a value again.
      const bool add_or_del = name == kAttrAdd || name == kAttrDel;
      bool dead = h.entries.empty();
      if (!dead && !add_or_del) {
        dead = std::all_of(h.entries.begin(), h.entries.end(),
                           [&](const AttrValue& v) {
                             return below(v.timestamp) &&
                                    (v.effect <= 0 || !v.value);
                           });
      }
      if (dead) {
        stats.values_removed += h.entries.size();
        ++stats.attributes_removed;
        attr_it = e.attributes.erase(attr_it);
      } else {
        ++attr_it;
      }
    }
  }
  return stats;
}

}  // namespace xmlcrdt

#include "xmlcrdt/sim/undo_example.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "xmlcrdt/render.hpp"

namespace xmlcrdt::sim {

namespace {

// Event indices. g* are generations (applied locally at the generating
// replica), d* deliveries. Replicas are 1..3 (array index site-1).
enum : int {
  kGenAdd = 0,     // replica 2
  kGenDel,         // replica 2
  kGenUndoDel2,    // replica 2
  kGenUndoAdd,     // replica 3
  kGenUndoDel1,    // replica 1
  kAddAt1,
  kDelAt1,
  kUndoDel2At1,
  kAddAt3,
  kDelAt3,
  kUndoDel2At3,
  kUndoAddAt1,
  kUndoAddAt2,
  kUndoDel1At2,
  kUndoDel1At3,
  kEventCount
};

// Prerequisites: channel FIFO order, generation order at each replica,
// undo generated only before a concurrent undo of the same target
// arrives (the effect > 0 generation guard), and undos delivered after
// their target operation.
const std::vector<int> kPre[kEventCount] = {
    /*kGenAdd*/ {},
    /*kGenDel*/ {kGenAdd},
    /*kGenUndoDel2*/ {kGenDel},
    /*kGenUndoAdd*/ {kAddAt3},
    /*kGenUndoDel1*/ {kAddAt1, kDelAt1},
    /*kAddAt1*/ {kGenAdd},
    /*kDelAt1*/ {kGenDel, kAddAt1},
    /*kUndoDel2At1*/ {kGenUndoDel2, kDelAt1, kGenUndoDel1},
    /*kAddAt3*/ {kGenAdd},
    /*kDelAt3*/ {kGenDel, kAddAt3},
    /*kUndoDel2At3*/ {kGenUndoDel2, kDelAt3},
    /*kUndoAddAt1*/ {kGenUndoAdd, kAddAt1},
    /*kUndoAddAt2*/ {kGenUndoAdd},
    /*kUndoDel1At2*/ {kGenUndoDel1, kGenUndoDel2},
    /*kUndoDel1At3*/ {kGenUndoDel1, kDelAt3},
};

// The operations with their canonical timestamps, fully determined by
// each generation's required causal past.
struct Ops {
  Operation add = Operation::add(kRootId, {1, 2});
  Operation del = Operation::del({1, 2}, {2, 2});
  Operation undo_del2 = Operation::undo(del, {3, 2});
  Operation undo_add = Operation::undo(add, {2, 3});
  Operation undo_del1 = Operation::undo(del, {3, 1});
};

struct State {
  std::array<Document, 3> docs;
  friend bool operator==(const State&, const State&) = default;
};

void apply(State& st, const Ops& ops, int event) {
  auto at = [&](int site) -> Document& { return st.docs[site - 1]; };
  switch (event) {
    case kGenAdd: deliver(at(2), ops.add, Mode::undo); break;
    case kGenDel: deliver(at(2), ops.del, Mode::undo); break;
    case kGenUndoDel2: deliver(at(2), ops.undo_del2, Mode::undo); break;
    case kGenUndoAdd: deliver(at(3), ops.undo_add, Mode::undo); break;
    case kGenUndoDel1: deliver(at(1), ops.undo_del1, Mode::undo); break;
    case kAddAt1: deliver(at(1), ops.add, Mode::undo); break;
    case kDelAt1: deliver(at(1), ops.del, Mode::undo); break;
    case kUndoDel2At1: deliver(at(1), ops.undo_del2, Mode::undo); break;
    case kAddAt3: deliver(at(3), ops.add, Mode::undo); break;
    case kDelAt3: deliver(at(3), ops.del, Mode::undo); break;
    case kUndoDel2At3: deliver(at(3), ops.undo_del2, Mode::undo); break;
    case kUndoAddAt1: deliver(at(1), ops.undo_add, Mode::undo); break;
    case kUndoAddAt2: deliver(at(2), ops.undo_add, Mode::undo); break;
    case kUndoDel1At2: deliver(at(2), ops.undo_del1, Mode::undo); break;
    case kUndoDel1At3: deliver(at(3), ops.undo_del1, Mode::undo); break;
  }
}

bool check_final(const State& st, const Ops& ops, UndoExampleReport& report,
                 std::string& failure) {
  for (int i = 0; i < 3; ++i) {
    const Document& doc = st.docs[i];
    const Edge* e = doc.find(ops.add.target);
    if (!e) {
      failure = "edge missing at replica " + std::to_string(i + 1);
      return false;
    }
    const AttrValue* add = get_value(*e->history(kAttrAdd), ops.add.ts);
    const AttrValue* del = get_value(*e->history(kAttrDel), ops.del.ts);
    if (!add || !del) {
      failure = "history entry missing at replica " + std::to_string(i + 1);
      return false;
    }
    report.add_effect[i] = add->effect;
    report.del_effect[i] = del->effect;
    report.renders[i] = serialize(render(doc));
    if (add->effect != 0 || del->effect != -1 || is_visible(*e) ||
        report.renders[i] != "<root/>") {
      failure = "replica " + std::to_string(i + 1) +
                " ended with @add effect " + std::to_string(add->effect) +
                ", @del effect " + std::to_string(del->effect) + ", render " +
                report.renders[i];
      return false;
    }
  }
  return true;
}

}  // namespace

// Explores the lattice of event subsets instead of one linear extension
// at a time: every reachable subset keeps one state, and every edge into
// an already-reached subset must produce the identical state. By
// induction this verifies that all linear extensions of the partial
// order end in the same state, while visiting each subset only once; the
// number of extensions is counted by the same sweep.
UndoExampleReport run_undo_example() {
  UndoExampleReport report;
  const Ops ops;

  std::map<std::uint32_t, State> layer;
  std::map<std::uint32_t, std::uint64_t> ways;
  layer.emplace(0, State{});
  ways[0] = 1;

  for (int step = 0; step < kEventCount; ++step) {
    std::map<std::uint32_t, State> next_layer;
    std::map<std::uint32_t, std::uint64_t> next_ways;
    for (const auto& [mask, state] : layer) {
      for (int ev = 0; ev < kEventCount; ++ev) {
        if (mask & (1u << ev)) continue;
        bool ready = true;
        for (int p : kPre[ev]) {
          if (!(mask & (1u << p))) {
            ready = false;
            break;
          }
        }
        if (!ready) continue;
        State next = state;
        apply(next, ops, ev);
        const std::uint32_t m2 = mask | (1u << ev);
        auto it = next_layer.find(m2);
        if (it == next_layer.end()) {
          next_layer.emplace(m2, std::move(next));
        } else if (!(it->second == next)) {
          report.failure = "delivery orders disagree after event " +
                           std::to_string(ev);
          return report;
        }
        next_ways[m2] += ways.at(mask);
      }
    }
    layer = std::move(next_layer);
    ways = std::move(next_ways);
  }

  if (layer.size() != 1) {
    report.failure = "partial order did not complete";
    return report;
  }
  report.interleavings = ways.begin()->second;
  std::string failure;
  report.passed = check_final(layer.begin()->second, ops, report, failure);
  report.failure = failure;
  return report;
}

}  // namespace xmlcrdt::sim

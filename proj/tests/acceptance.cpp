// Acceptance checks for the engine: one pass/fail line per criterion.
// Exit code 0 iff every criterion passes.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "xmlcrdt/engine.hpp"
#include "xmlcrdt/errors.hpp"
#include "xmlcrdt/gc.hpp"
#include "xmlcrdt/render.hpp"
#include "xmlcrdt/sim/undo_example.hpp"
#include "xmlcrdt/sim/fuzz.hpp"
#include "xmlcrdt/sim/simulator.hpp"

using namespace xmlcrdt;
using namespace xmlcrdt::sim;

namespace {

using Clock = std::chrono::steady_clock;

long long ms_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                               start)
      .count();
}

std::vector<Timestamp> editable_edges(const Document& doc) {
  std::vector<Timestamp> out;
  for (const auto& [id, e] : doc.index()) {
    if (id == kRootId) continue;
    if (e.parent && is_reachably_visible(doc, id)) out.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------------
// 1. Three-replica concurrent-undo scenario, every interleaving.
// ---------------------------------------------------------------------
bool criterion_scenario(std::string& detail) {
  const auto start = Clock::now();
  UndoExampleReport rep = run_undo_example();
  const long long elapsed = ms_since(start);
  std::ostringstream out;
  if (!rep.passed) {
    detail = rep.failure;
    return false;
  }
  for (int i = 0; i < 3; ++i) {
    if (rep.add_effect[i] != 0 || rep.del_effect[i] != -1 ||
        rep.renders[i] != "<root/>") {
      detail = "unexpected final state at replica " + std::to_string(i + 1);
      return false;
    }
  }
  if (elapsed >= 1000) {
    detail = "took " + std::to_string(elapsed) + " ms (limit 1000)";
    return false;
  }
  out << rep.interleavings << " interleavings, add effect 0, del effect -1, "
      << "render <root/> everywhere (" << elapsed << " ms)";
  detail = out.str();
  return true;
}

// ---------------------------------------------------------------------
// 2. Commutativity oracle: systematic small operation sets, every
//    causally valid delivery permutation, byte-identical output.
// ---------------------------------------------------------------------
bool deliver_sequence(const std::vector<const Operation*>& seq,
                      std::string& out) {
  Document doc;
  try {
    for (const Operation* op : seq) deliver(doc, *op, Mode::undo);
  } catch (const CausalityViolationError&) {
    return false;
  } catch (const DuplicateDeliveryError&) {
    return false;
  }
  out = serialize(render(doc));
  return true;
}

bool check_permutations(const std::vector<const Operation*>& set,
                        std::size_t& perms_checked, std::string& detail) {
  std::vector<std::size_t> order(set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::optional<std::string> expected;
  do {
    std::vector<const Operation*> seq;
    seq.reserve(set.size());
    for (std::size_t i : order) seq.push_back(set[i]);
    std::string rendered;
    if (!deliver_sequence(seq, rendered)) continue;
    ++perms_checked;
    if (!expected) {
      expected = rendered;
    } else if (rendered != *expected) {
      std::ostringstream out;
      out << "divergent permutations of {";
      for (const Operation* op : set) out << " " << to_string(op->ts);
      out << " }: '" << *expected << "' vs '" << rendered << "'";
      detail = out.str();
      return false;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return true;
}

bool criterion_commutativity(std::string& detail) {
  const auto start = Clock::now();
  // Two replicas, two edges (one nested), two attributes, plus undos and
  // redos of earlier pool entries.
  Operation a1 = Operation::add(kRootId, {1, 1});
  Operation a2 = Operation::add({1, 1}, {1, 2});
  Operation d1 = Operation::del({1, 1}, {2, 2});
  Operation d2 = Operation::del({1, 2}, {2, 1});
  Operation s1 = Operation::set_attr({1, 1}, "@tag", "a", {3, 1});
  Operation s2 = Operation::set_attr({1, 1}, "x", "v", {3, 2});
  Operation s3 = Operation::set_attr({1, 2}, "@tag", "b", {4, 1});
  Operation s4 = Operation::set_attr({1, 2}, "x", std::nullopt, {4, 2});
  std::vector<Operation> pool = {a1,
                                 a2,
                                 d1,
                                 d2,
                                 s1,
                                 s2,
                                 s3,
                                 s4,
                                 Operation::undo(a1, {5, 2}),
                                 Operation::undo(d1, {5, 1}),
                                 Operation::undo(s1, {6, 2}),
                                 Operation::redo(d1, {6, 1}),
                                 Operation::redo(a1, {7, 1}),
                                 Operation::undo(s2, {7, 2})};
  const std::size_t n = pool.size();

  std::size_t sets_checked = 0;
  std::size_t perms_checked = 0;
  std::vector<const Operation*> set;

  // All pairs and triples.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      set = {&pool[i], &pool[j]};
      ++sets_checked;
      if (!check_permutations(set, perms_checked, detail)) return false;
      for (std::size_t l = j + 1; l < n; ++l) {
        set = {&pool[i], &pool[j], &pool[l]};
        ++sets_checked;
        if (!check_permutations(set, perms_checked, detail)) return false;
      }
    }
  }
  // Quadruples and quintuples anchored on the first Add so that most
  // permutations are causally valid.
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t l = j + 1; l < n; ++l) {
        set = {&pool[0], &pool[i], &pool[j], &pool[l]};
        ++sets_checked;
        if (!check_permutations(set, perms_checked, detail)) return false;
        for (std::size_t m = l + 1; m < n; ++m) {
          set = {&pool[0], &pool[i], &pool[j], &pool[l], &pool[m]};
          ++sets_checked;
          if (!check_permutations(set, perms_checked, detail)) return false;
        }
      }
    }
  }

  std::ostringstream out;
  out << sets_checked << " operation sets, " << perms_checked
      << " valid permutations, all byte-identical (" << ms_since(start)
      << " ms)";
  detail = out.str();
  return true;
}

// ---------------------------------------------------------------------
// 3 + 7. Convergence fuzz and clock safety.
// ---------------------------------------------------------------------
struct FuzzSummary {
  bool all_converged = true;
  std::uint64_t seeds = 0;
  std::uint64_t clock_violations = 0;
  std::string first_failure;
};

FuzzSummary g_fuzz_summary;

bool criterion_fuzz(std::string& detail) {
  const auto start = Clock::now();
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    FuzzConfig cfg;
    cfg.seed = seed;
    cfg.replicas = 4;
    cfg.ops = 200;
    cfg.mode = Mode::undo;
    FuzzReport rep = run_fuzz(cfg);
    ++g_fuzz_summary.seeds;
    g_fuzz_summary.clock_violations += rep.clock_violations;
    if (!rep.converged) {
      g_fuzz_summary.all_converged = false;
      if (g_fuzz_summary.first_failure.empty()) {
        g_fuzz_summary.first_failure = "seed " + std::to_string(seed);
      }
    }
  }
  if (!g_fuzz_summary.all_converged) {
    detail = "divergence at " + g_fuzz_summary.first_failure;
    return false;
  }
  std::ostringstream out;
  out << "100/100 seeds converged, 4 replicas x 200 ops each ("
      << ms_since(start) << " ms)";
  detail = out.str();
  return true;
}

// ---------------------------------------------------------------------
// 4. LWW attribute storms against an independent max-timestamp oracle.
// ---------------------------------------------------------------------
bool criterion_lww(std::string& detail) {
  const auto start = Clock::now();
  const char* const names[] = {"a", "b", "c"};
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Simulation sim(Simulation::Config{3, Mode::lww, 0, true, true});
    Timestamp edge = sim.local_add(1, kRootId, std::nullopt, "e");
    sim.deliver_all();

    std::mt19937_64 rng(900 + seed);
    // Winner per attribute, tracked independently at generation time.
    std::map<std::string, std::pair<Timestamp, std::optional<std::string>>>
        winners;
    for (int i = 0; i < 40; ++i) {
      std::uint32_t site = 1 + static_cast<std::uint32_t>(rng() % 3);
      std::string name = names[rng() % 3];
      std::optional<std::string> value;
      if (rng() % 8 != 0) {
        value = "v" + std::to_string(rng() % 1000) + "s" +
                std::to_string(site);
      }
      Timestamp ts = sim.local_set_attr(site, edge, name, value);
      auto it = winners.find(name);
      if (it == winners.end() || ts > it->second.first) {
        winners[name] = {ts, value};
      }
      while (rng() % 2 == 0 && sim.deliver_one_random(rng)) {
      }
    }
    sim.deliver_all();
    if (!sim.converged()) {
      detail = "lww divergence at seed " + std::to_string(seed);
      return false;
    }
    for (std::uint32_t s : sim.sites()) {
      const Edge* e = sim.replica(s).doc.find(edge);
      for (const auto& [name, expected] : winners) {
        const ValueHistory* h = e ? e->history(name) : nullptr;
        if (!h || h->entries.size() != 1 ||
            h->entries[0].timestamp != expected.first ||
            h->entries[0].value != expected.second) {
          detail = "seed " + std::to_string(seed) + " site " +
                   std::to_string(s) + ": attribute '" + name +
                   "' does not hold the max-timestamp write " +
                   to_string(expected.first);
          return false;
        }
      }
    }
  }
  std::ostringstream out;
  out << "50/50 storm seeds match the independent max-timestamp oracle ("
      << ms_since(start) << " ms)";
  detail = out.str();
  return true;
}

// ---------------------------------------------------------------------
// 5. GC transparency and effectiveness on a delete-heavy workload.
// ---------------------------------------------------------------------
struct EligibleScan {
  std::size_t edges = 0;
  std::size_t values = 0;
  std::size_t total() const { return edges + values; }
};

// Counts items the purge must remove, without calling any purge code:
// permanently dead edges whose every timestamp is below the horizon, and
// old values without effect on the remaining edges.
EligibleScan independent_scan(const Document& d, std::int64_t M) {
  EligibleScan scan;
  auto is_old = [M](const Timestamp& ts) {
    return static_cast<std::int64_t>(ts.clock) < M;
  };
  for (const auto& [id, e] : d.index()) {
    if (id == kRootId) continue;
    bool permanently_dead = false;
    if (const ValueHistory* del = e.history(kAttrDel)) {
      for (const AttrValue& v : del->entries) {
        if (v.effect > 0 && is_old(v.timestamp)) permanently_dead = true;
      }
    }
    if (const ValueHistory* add = e.history(kAttrAdd)) {
      if (!add->entries.empty() && add->entries.front().effect <= 0 &&
          is_old(add->entries.front().timestamp)) {
        permanently_dead = true;
      }
    }
    if (permanently_dead) {
      bool all_old = is_old(id);
      for (const auto& [name, h] : e.attributes) {
        for (const AttrValue& v : h.entries) {
          all_old = all_old && is_old(v.timestamp);
        }
      }
      if (all_old) {
        ++scan.edges;
        continue;
      }
    }
    for (const auto& [name, h] : e.attributes) {
      for (const AttrValue& v : h.entries) {
        if (v.effect <= 0 && is_old(v.timestamp)) ++scan.values;
      }
    }
  }
  return scan;
}

void random_edit(Simulation& sim, std::mt19937_64& rng, int roll_del,
                 int roll_undo, std::uint32_t& generated) {
  const std::uint32_t site =
      1 + static_cast<std::uint32_t>(rng() % sim.replica_count());
  Replica& r = sim.replica(site);
  const int roll = static_cast<int>(rng() % 100);
  try {
    if (roll < roll_del) {
      auto targets = editable_edges(r.doc);
      if (targets.empty()) return;
      sim.local_del(site, targets[rng() % targets.size()]);
      ++generated;
    } else if (roll < roll_del + roll_undo) {
      std::vector<Timestamp> candidates;
      for (const auto& [ts, op] : r.known_ops) {
        EffectKey key = effect_key(op);
        const Edge* e = r.doc.find(key.edge);
        const ValueHistory* h = e ? e->history(key.attr) : nullptr;
        const AttrValue* v = h ? get_value(*h, key.entry) : nullptr;
        if (v && v->effect > 0 && r.gc.can_undo(ts)) candidates.push_back(ts);
      }
      if (candidates.empty()) return;
      sim.local_undo(site, candidates[rng() % candidates.size()]);
      ++generated;
    } else if (roll < roll_del + roll_undo + 15) {
      auto targets = editable_edges(r.doc);
      if (targets.empty()) return;
      std::optional<std::string> value;
      if (rng() % 5 != 0) value = "v" + std::to_string(rng() % 4);
      sim.local_set_attr(site, targets[rng() % targets.size()],
                         rng() % 2 ? "x" : "y", value);
      ++generated;
    } else {
      auto targets = editable_edges(r.doc);
      Timestamp parent = kRootId;
      if (!targets.empty() && rng() % 2 == 0) {
        parent = targets[rng() % targets.size()];
      }
      sim.local_add(site, parent, std::nullopt, rng() % 2 ? "a" : "b");
      generated += 3;
    }
  } catch (const GenerationRejectedError&) {
  }
  while (rng() % 2 == 0 && sim.deliver_one_random(rng)) {
  }
}

bool criterion_gc(std::string& detail) {
  const auto start = Clock::now();
  Simulation sim(Simulation::Config{4, Mode::undo, 0, true, true});
  std::mt19937_64 rng(4242);

  // Delete-heavy session: half the operations are Del or Undo.
  std::uint32_t generated = 0;
  while (generated < 500) random_edit(sim, rng, 30, 20, generated);
  sim.deliver_all();
  for (std::uint32_t s : sim.sites()) sim.heartbeat(s);
  sim.deliver_all();
  for (std::uint32_t s : sim.sites()) sim.heartbeat(s);
  sim.deliver_all();

  std::size_t eligible_total = 0;
  std::size_t removed_total = 0;
  for (std::uint32_t s : sim.sites()) {
    auto M = sim.replica(s).gc.horizon();
    if (!M || *M <= 0) {
      detail = "horizon undefined after minima exchange at site " +
               std::to_string(s);
      return false;
    }
    const Document& doc = sim.replica(s).doc;
    EligibleScan scan = independent_scan(doc, *M);
    const std::string before = sim.render_site(s);
    const std::size_t stored_before = doc.edge_count() + doc.value_count();
    sim.purge_replica(s);
    const std::size_t stored_after = doc.edge_count() + doc.value_count();
    if (sim.render_site(s) != before) {
      detail = "purge changed the render at site " + std::to_string(s);
      return false;
    }
    if (stored_before - stored_after < scan.total()) {
      detail = "site " + std::to_string(s) + ": removed " +
               std::to_string(stored_before - stored_after) +
               " stored items, independent scan found " +
               std::to_string(scan.total()) + " eligible";
      return false;
    }
    eligible_total += scan.total();
    removed_total += stored_before - stored_after;
  }
  if (eligible_total == 0) {
    detail = "independent scan found nothing eligible; workload too light";
    return false;
  }

  // The collected state must keep working.
  std::uint32_t more = 0;
  while (more < 100) random_edit(sim, rng, 20, 10, more);
  sim.deliver_all();
  if (!sim.converged()) {
    detail = "replicas diverged after post-purge operations";
    return false;
  }
  std::ostringstream out;
  out << "renders preserved on 4 replicas, " << removed_total
      << " stored items removed (scan lower bound " << eligible_total
      << "), convergent after 100 more ops (" << ms_since(start) << " ms)";
  detail = out.str();
  return true;
}

// ---------------------------------------------------------------------
// 6. Undo-window safety with k = 5 and interleaved purges.
// ---------------------------------------------------------------------
bool criterion_window(std::string& detail) {
  const auto start = Clock::now();
  std::size_t window_checks = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Simulation sim(Simulation::Config{3, Mode::undo, 5, true, true});
    std::mt19937_64 rng(7000 + seed);
    std::map<std::uint32_t, std::deque<Timestamp>> recent;
    std::uint32_t generated = 0;

    try {
      // Burst-style editing: each turn a site performs five consecutive
      // local operations (as an interactive editor does between pauses)
      // and may then undo any of them; deliveries happen between turns.
      for (int turn = 0; turn < 30; ++turn) {
        const std::uint32_t site = 1 + static_cast<std::uint32_t>(rng() % 3);
        Replica& r = sim.replica(site);
        auto& q = recent[site];
        try {
          auto targets = editable_edges(r.doc);
          if (!targets.empty() && rng() % 3 == 0) {
            q.push_back(sim.local_del(site, targets[rng() % targets.size()]));
            ++generated;
          }
          Timestamp parent = kRootId;
          targets = editable_edges(r.doc);
          if (!targets.empty() && rng() % 2 == 0) {
            parent = targets[rng() % targets.size()];
          }
          Timestamp id = sim.local_add(site, parent, std::nullopt, "e");
          q.push_back(id);
          q.push_back({id.clock + 1, site});
          q.push_back({id.clock + 2, site});
          generated += 3;
          q.push_back(sim.local_set_attr(site, id, "x",
                                         "v" + std::to_string(rng() % 3)));
          q.push_back(sim.local_set_attr(site, id, "y", "w"));
          generated += 2;
        } catch (const GenerationRejectedError&) {
          continue;
        }
        // The window must cover the site's 5 most recent local ops; undo
        // one of them now and then, and it must never be rejected for
        // being outside the window.
        const std::size_t span = std::min<std::size_t>(q.size(), 5);
        for (std::size_t i = 0; i < span; ++i) {
          ++window_checks;
          Timestamp t = q[q.size() - 1 - i];
          if (!sim.replica(site).gc.can_undo(t)) {
            detail = "seed " + std::to_string(seed) + ": recent op " +
                     to_string(t) + " outside the k=5 window at site " +
                     std::to_string(site);
            return false;
          }
        }
        if (rng() % 2 == 0) {
          Timestamp target = q[q.size() - 1 - rng() % span];
          try {
            sim.local_undo(site, target);
            ++generated;
          } catch (const GenerationRejectedError& e) {
            if (std::string(e.what()).find("authorization window") !=
                std::string::npos) {
              detail = "seed " + std::to_string(seed) +
                       ": recent op rejected by the window: " + e.what();
              return false;
            }
          }
        }
        while (rng() % 2 == 0 && sim.deliver_one_random(rng)) {
        }
        if (turn % 6 == 5) {
          for (std::uint32_t s : sim.sites()) sim.heartbeat(s);
          for (int i = 0; i < 10; ++i) sim.deliver_one_random(rng);
          for (std::uint32_t s : sim.sites()) sim.purge_replica(s);
        }
      }
      sim.deliver_all();
    } catch (const CausalityViolationError& e) {
      detail = "seed " + std::to_string(seed) +
               ": delivered undo/redo hit a purged entry: " + e.what();
      return false;
    }
    if (!sim.converged()) {
      detail = "seed " + std::to_string(seed) + ": divergence";
      return false;
    }
  }
  std::ostringstream out;
  out << "20/20 seeds, " << window_checks
      << " window checks on recent local ops, zero causality violations ("
      << ms_since(start) << " ms)";
  detail = out.str();
  return true;
}

// ---------------------------------------------------------------------
// 7. Clock safety across every fuzz run above.
// ---------------------------------------------------------------------
bool criterion_clocks(std::string& detail) {
  if (g_fuzz_summary.seeds == 0) {
    detail = "no fuzz runs recorded";
    return false;
  }
  if (g_fuzz_summary.clock_violations != 0) {
    detail = std::to_string(g_fuzz_summary.clock_violations) +
             " locally generated timestamps not above everything seen";
    return false;
  }
  detail = "0 violations across " + std::to_string(g_fuzz_summary.seeds) +
           " fuzz runs";
  return true;
}

struct Criterion {
  const char* name;
  bool (*run)(std::string&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"concurrent-undo scenario, all interleavings", criterion_scenario},
      {"commutativity oracle, systematic permutations", criterion_commutativity},
      {"convergence fuzz, 100 seeds", criterion_fuzz},
      {"lww max-timestamp semantics, 50 storm seeds", criterion_lww},
      {"gc transparency and effectiveness", criterion_gc},
      {"undo window safety, k=5", criterion_window},
      {"clock safety across fuzz runs", criterion_clocks},
  };
  bool all_ok = true;
  for (const Criterion& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "PASS" : "FAIL") << ": " << c.name
              << (detail.empty() ? "" : " - " + detail) << "\n";
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}

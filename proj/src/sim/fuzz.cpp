#include "xmlcrdt/sim/fuzz.hpp"

#include <algorithm>
#include <vector>

#include "xmlcrdt/errors.hpp"
#include "xmlcrdt/render.hpp"

namespace xmlcrdt::sim {

namespace {

const char* const kTags[] = {"a", "b", "p", "div", "li"};
const char* const kAttrs[] = {"x", "y", "href"};
const char* const kValues[] = {"1", "2", "red", "blue"};

std::vector<Timestamp> visible_edges(const Document& doc) {
  std::vector<Timestamp> out;
  for (const auto& [id, e] : doc.index()) {
    if (id == kRootId) continue;
    if (e.parent && is_reachably_visible(doc, id)) out.push_back(id);
  }
  return out;
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[rng() % v.size()];
}

}  // namespace

FuzzReport run_fuzz(const FuzzConfig& cfg) {
  FuzzReport report;
  report.seed = cfg.seed;

  Simulation::Config scfg;
  scfg.replicas = cfg.replicas;
  scfg.mode = cfg.mode;
  scfg.k = cfg.k;
  scfg.fifo = true;
  scfg.track_gc = true;
  Simulation sim(scfg);

  std::mt19937_64 rng(cfg.seed);
  auto chance = [&](double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
  };

  const int total_weight = cfg.mix.add + cfg.mix.del + cfg.mix.set_attr +
                           (cfg.mode == Mode::undo
                                ? cfg.mix.undo + cfg.mix.redo
                                : 0);

  while (report.ops_generated < cfg.ops) {
    const std::uint32_t site = 1 + static_cast<std::uint32_t>(
                                       rng() % cfg.replicas);
    Replica& r = sim.replica(site);
    int roll = static_cast<int>(rng() % static_cast<unsigned>(total_weight));

    try {
      if ((roll -= cfg.mix.add) < 0) {
        // Insert an element (or occasionally text) under a visible edge.
        auto targets = visible_edges(r.doc);
        Timestamp parent = kRootId;
        if (!targets.empty() && chance(0.6)) parent = pick(targets, rng);
        // Insert after a random positioned sibling, or at the start.
        std::optional<Timestamp> after;
        const Edge* p = r.doc.find(parent);
        std::vector<Timestamp> positioned;
        for (const Timestamp& cid : p->children) {
          const Edge* c = r.doc.find(cid);
          if (!c) continue;
          const ValueHistory* h = c->history(kAttrPosition);
          if (h && current_attribute_value(*h)) positioned.push_back(cid);
        }
        if (!positioned.empty() && chance(0.5)) after = pick(positioned, rng);
        if (cfg.mode == Mode::undo && chance(0.2)) {
          sim.local_text(site, parent, after,
                         std::string("t") + std::to_string(rng() % 10));
        } else {
          sim.local_add(site, parent, after,
                        kTags[rng() % std::size(kTags)]);
        }
        report.ops_generated += 3;
      } else if ((roll -= cfg.mix.del) < 0) {
        auto targets = visible_edges(r.doc);
        if (targets.empty()) continue;
        sim.local_del(site, pick(targets, rng));
        ++report.ops_generated;
      } else if ((roll -= cfg.mix.set_attr) < 0) {
        auto targets = visible_edges(r.doc);
        if (targets.empty()) continue;
        std::optional<std::string> value;
        if (!chance(0.15)) value = kValues[rng() % std::size(kValues)];
        sim.local_set_attr(site, pick(targets, rng),
                           kAttrs[rng() % std::size(kAttrs)], value);
        ++report.ops_generated;
      } else if ((roll -= cfg.mix.undo) < 0) {
        // Undo a random still-effective known operation. Position writes
        // are structural and set exactly once per edge; undoing one
        // would let the site hand out the same position twice.
        std::vector<Timestamp> candidates;
        for (const auto& [ts, op] : r.known_ops) {
          if (op.kind == OpKind::SetAttr && op.attr == kAttrPosition) continue;
          EffectKey key = effect_key(op);
          const Edge* e = r.doc.find(key.edge);
          const ValueHistory* h = e ? e->history(key.attr) : nullptr;
          const AttrValue* v = h ? get_value(*h, key.entry) : nullptr;
          if (v && v->effect > 0 && r.gc.can_undo(ts)) candidates.push_back(ts);
        }
        if (candidates.empty()) continue;
        sim.local_undo(site, pick(candidates, rng));
        ++report.ops_generated;
      } else {
        std::vector<Timestamp> candidates;
        for (const auto& [ts, op] : r.known_ops) {
          if (op.kind == OpKind::SetAttr && op.attr == kAttrPosition) continue;
          EffectKey key = effect_key(op);
          const Edge* e = r.doc.find(key.edge);
          const ValueHistory* h = e ? e->history(key.attr) : nullptr;
          const AttrValue* v = h ? get_value(*h, key.entry) : nullptr;
          if (v && v->effect <= 0 && r.gc.can_undo(ts)) candidates.push_back(ts);
        }
        if (candidates.empty()) continue;
        sim.local_redo(site, pick(candidates, rng));
        ++report.ops_generated;
      }
    } catch (const GenerationRejectedError&) {
      ++report.rejected;
      continue;
    }

    while (chance(cfg.deliver_prob)) {
      if (!sim.deliver_one_random(rng)) break;
      ++report.delivered;
    }

    if (cfg.purge_every > 0 &&
        report.ops_generated % cfg.purge_every == 0) {
      for (std::uint32_t s : sim.sites()) sim.heartbeat(s);
      for (std::uint32_t s : sim.sites()) {
        report.purged_items += sim.purge_replica(s).total();
      }
    }
  }

  report.delivered += sim.deliver_all();
  if (cfg.purge_every > 0) {
    for (std::uint32_t s : sim.sites()) sim.heartbeat(s);
    sim.deliver_all();
    for (std::uint32_t s : sim.sites()) sim.heartbeat(s);
    sim.deliver_all();
    for (std::uint32_t s : sim.sites()) {
      report.purged_items += sim.purge_replica(s).total();
    }
  }

  report.converged = sim.converged();
  report.render = sim.render_site(1);
  report.final_edges = sim.replica(1).doc.edge_count();
  report.final_values = sim.replica(1).doc.value_count();
  report.clock_violations = sim.total_clock_violations();
  return report;
}

}  // namespace xmlcrdt::sim

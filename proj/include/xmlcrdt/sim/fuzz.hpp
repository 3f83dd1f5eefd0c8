#pragma once

#include <cstdint>
#include <string>

#include "xmlcrdt/sim/simulator.hpp"

namespace xmlcrdt::sim {

/// Weighted operation mix, in percent. Undo/redo weights are ignored in
/// lww mode.
struct FuzzMix {
  int add = 40;
  int del = 15;
  int set_attr = 25;
  int undo = 10;
  int redo = 10;
};

struct FuzzConfig {
  std::uint64_t seed = 0;
  std::uint32_t replicas = 4;
  std::uint32_t ops = 200;
  Mode mode = Mode::undo;
  std::uint64_t k = 0;
  FuzzMix mix;
  /// Probability of attempting one random delivery after each generation
  /// step.
  double deliver_prob = 0.6;
  /// When > 0: every `purge_every` generated ops, all sites heartbeat
  /// and purge with whatever horizon they have.
  std::uint32_t purge_every = 0;
};

struct FuzzReport {
  std::uint64_t seed = 0;
  bool converged = false;
  std::uint32_t ops_generated = 0;
  std::uint32_t rejected = 0;
  std::size_t delivered = 0;
  std::size_t final_edges = 0;
  std::size_t final_values = 0;
  std::size_t purged_items = 0;
  std::uint32_t clock_violations = 0;
  std::string render;  // replica 1's final serialization
};

/// Seeded pseudo-random campaign: generates ops across all replicas with
/// interleaved random deliveries, drains to quiescence, and compares the
/// replicas' serialized renders. Identical config gives an identical
/// report.
FuzzReport run_fuzz(const FuzzConfig& cfg);

}  // namespace xmlcrdt::sim

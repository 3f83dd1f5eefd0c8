#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "xmlcrdt/sim/simulator.hpp"

namespace xmlcrdt::sim {

/// Result of replaying the concurrent-undo scenario: one edge added,
/// deleted, the add undone at one replica while two replicas undo the
/// delete concurrently. Every interleaving must end with @add effect 0,
/// @del effect -1 and the edge invisible on all three replicas.
struct UndoExampleReport {
  bool passed = false;
  std::size_t interleavings = 0;
  std::string failure;
  // Final values from the last interleaving checked (identical across
  // interleavings when passed).
  std::array<int, 3> add_effect{};
  std::array<int, 3> del_effect{};
  std::array<std::string, 3> renders{};
};

/// Replays the scenario under every delivery interleaving consistent
/// with its message arrows (per-channel FIFO, undo generated only while
/// its target still has effect, undos delivered after their targets).
UndoExampleReport run_undo_example();

}  // namespace xmlcrdt::sim

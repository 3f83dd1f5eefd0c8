#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "xmlcrdt/sim/simulator.hpp"

namespace xmlcrdt::sim {

// Scripted actions, one per scenario line.
struct AddStep {
  std::uint32_t site;
  Timestamp parent;
  std::optional<Timestamp> after;  // nullopt = start
  std::string tag;
};
struct TextStep {
  std::uint32_t site;
  Timestamp parent;
  std::optional<Timestamp> after;
  std::string value;
};
struct DelStep {
  std::uint32_t site;
  Timestamp target;
};
struct SetAttrStep {
  std::uint32_t site;
  Timestamp target;
  std::string name;
  std::optional<std::string> value;  // nullopt = nil
};
struct UndoStep {
  std::uint32_t site;
  Timestamp op;
};
struct RedoStep {
  std::uint32_t site;
  Timestamp op;
};
struct DeliverStep {
  std::uint32_t to;
  std::uint32_t from;
  std::uint32_t count = 1;  // 0 = all
};
struct DeliverAllStep {};
struct HeartbeatStep {
  std::uint32_t site;
};
struct PurgeStep {
  std::uint32_t site;
};
struct AssertConvergedStep {};
struct AssertRenderStep {
  std::uint32_t site;
  std::string xml;
};

using Step = std::variant<AddStep, TextStep, DelStep, SetAttrStep, UndoStep,
                          RedoStep, DeliverStep, DeliverAllStep, HeartbeatStep,
                          PurgeStep, AssertConvergedStep, AssertRenderStep>;

struct Scenario {
  std::uint32_t replicas = 2;
  Mode mode = Mode::undo;
  std::uint64_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<int, Step>> steps;  // (line number, action)
};

/// Malformed scenario line.
struct ScenarioParseError : std::runtime_error {
  int line;
  ScenarioParseError(int line_, const std::string& what)
      : std::runtime_error("parse error at line " + std::to_string(line_) +
                           ": " + what),
        line(line_) {}
};

Scenario parse_scenario(std::istream& in);
Scenario parse_scenario_file(const std::string& path);

struct ReplayOptions {
  /// Check render preservation around every purge step and report purge
  /// effectiveness.
  bool gc_checks = false;
};

struct ReplayResult {
  bool ok = true;
  int failed_line = 0;
  std::string message;
  std::size_t assertions = 0;
  std::size_t purged_items = 0;
};

/// Executes a parsed scenario. Assertion results and failures go to
/// `diag`; the simulation is left in its final state for rendering.
class ScenarioRunner {
 public:
  explicit ScenarioRunner(const Scenario& scenario, ReplayOptions opts = {});

  ReplayResult run(std::ostream& diag);
  Simulation& simulation() { return sim_; }

 private:
  const Scenario& scenario_;
  ReplayOptions opts_;
  Simulation sim_;
};

}  // namespace xmlcrdt::sim

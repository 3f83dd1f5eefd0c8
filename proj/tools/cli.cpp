#include <chrono>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "xmlcrdt/sim/undo_example.hpp"
#include "xmlcrdt/sim/fuzz.hpp"
#include "xmlcrdt/sim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;   // assertion / convergence failure
constexpr int kExitUsage = 2;     // usage or parse error

int cmd_replay(const std::string& path, bool gc_checks) {
  xmlcrdt::sim::Scenario scenario;
  try {
    scenario = xmlcrdt::sim::parse_scenario_file(path);
  } catch (const xmlcrdt::sim::ScenarioParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  xmlcrdt::sim::ScenarioRunner runner(scenario, {gc_checks});
  auto result = runner.run(std::cout);
  if (!result.ok) {
    std::cout << "FAILED at line " << result.failed_line << "\n";
    return kExitFailure;
  }
  std::cout << "ok: " << result.assertions << " assertion(s)";
  if (gc_checks) std::cout << ", " << result.purged_items << " item(s) purged";
  std::cout << "\n";
  return kExitOk;
}

int cmd_fuzz(const xmlcrdt::sim::FuzzConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  auto report = xmlcrdt::sim::run_fuzz(cfg);
  auto elapsed = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  std::cout << (report.converged ? "converged" : "diverged") << "\n"
            << "ops: " << report.ops_generated
            << " delivered: " << report.delivered
            << " rejected: " << report.rejected
            << " edges: " << report.final_edges
            << " values: " << report.final_values
            << " clock-violations: " << report.clock_violations << "\n"
            << "time: " << elapsed << "s\n";
  if (!report.converged) {
    std::cerr << "reproduce with: xmlcrdt fuzz --seed " << cfg.seed
              << " --replicas " << cfg.replicas << " --ops " << cfg.ops
              << " --mode " << (cfg.mode == xmlcrdt::Mode::undo ? "undo" : "lww")
              << " --k " << cfg.k << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_undo_example() {
  auto report = xmlcrdt::sim::run_undo_example();
  std::cout << "interleavings: " << report.interleavings << "\n";
  for (int i = 0; i < 3; ++i) {
    std::cout << "replica " << (i + 1) << ": @add effect "
              << report.add_effect[i] << ", @del effect "
              << report.del_effect[i] << ", render " << report.renders[i]
              << "\n";
  }
  if (!report.passed) {
    std::cerr << "FAILED: " << report.failure << "\n";
    return kExitFailure;
  }
  std::cout << "ok\n";
  return kExitOk;
}

int cmd_render(const std::string& path, std::uint32_t site) {
  xmlcrdt::sim::Scenario scenario;
  try {
    scenario = xmlcrdt::sim::parse_scenario_file(path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  if (site == 0 || site > scenario.replicas) {
    std::cerr << "unknown site " << site << " (scenario has "
              << scenario.replicas << " replicas)\n";
    return kExitUsage;
  }
  xmlcrdt::sim::ScenarioRunner runner(scenario);
  auto result = runner.run(std::cerr);
  if (!result.ok) return kExitFailure;
  std::cout << runner.simulation().render_site(site) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replicated XML document engine with selective undo"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::uint32_t site = 1;
  xmlcrdt::sim::FuzzConfig fuzz_cfg;
  std::string fuzz_mode = "undo";

  auto* replay = app.add_subcommand("replay", "Replay a scenario file");
  replay->add_option("path", scenario_path, "scenario file")->required();

  auto* fuzz = app.add_subcommand("fuzz", "Random convergence campaign");
  fuzz->add_option("--seed", fuzz_cfg.seed, "rng seed");
  fuzz->add_option("--replicas", fuzz_cfg.replicas, "replica count");
  fuzz->add_option("--ops", fuzz_cfg.ops, "operations to generate");
  fuzz->add_option("--mode", fuzz_mode, "lww or undo")
      ->check(CLI::IsMember({"lww", "undo"}));
  fuzz->add_option("--k", fuzz_cfg.k, "undo-window constant");
  fuzz->add_option("--purge-every", fuzz_cfg.purge_every,
                   "heartbeat+purge period in ops (0 = never)");

  auto* undo_example = app.add_subcommand(
      "undo-example", "Replay the concurrent-undo example exhaustively");
  (void)undo_example;

  auto* gc = app.add_subcommand(
      "gc", "Replay a scenario with purge transparency checks");
  gc->add_option("path", scenario_path, "scenario file")->required();

  auto* render = app.add_subcommand("render", "Replay and print one "
                                              "replica's canonical XML");
  render->add_option("path", scenario_path, "scenario file")->required();
  render->add_option("--site", site, "replica to render");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (replay->parsed()) return cmd_replay(scenario_path, false);
  if (gc->parsed()) return cmd_replay(scenario_path, true);
  if (fuzz->parsed()) {
    fuzz_cfg.mode =
        fuzz_mode == "lww" ? xmlcrdt::Mode::lww : xmlcrdt::Mode::undo;
    return cmd_fuzz(fuzz_cfg);
  }
  if (app.got_subcommand("undo-example")) return cmd_undo_example();
  if (render->parsed()) return cmd_render(scenario_path, site);
  return kExitUsage;
}

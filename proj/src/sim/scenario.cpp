#include "xmlcrdt/sim/scenario.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "xmlcrdt/errors.hpp"

namespace xmlcrdt::sim {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::uint64_t parse_uint(int line, const std::string& text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ScenarioParseError(line, "expected number, got '" + text + "'");
  }
  return v;
}

Timestamp parse_ts(int line, const std::string& text) {
  auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw ScenarioParseError(line, "expected <clock,site>, got '" + text + "'");
  }
  Timestamp ts;
  ts.clock = parse_uint(line, text.substr(0, comma));
  ts.site = static_cast<std::uint32_t>(parse_uint(line, text.substr(comma + 1)));
  return ts;
}

/// Value of "key=..." among tokens, or error.
std::string expect_kv(int line, const std::vector<std::string>& toks,
                      std::size_t index, const std::string& key) {
  if (index >= toks.size() || toks[index].rfind(key + "=", 0) != 0) {
    throw ScenarioParseError(line, "expected " + key + "=<...>");
  }
  return toks[index].substr(key.size() + 1);
}

std::string rtrim(std::string s) {
  s.erase(s.find_last_not_of(" \t") + 1);
  return s;
}

/// Rest of the raw line after "key=", for values that may contain
/// spaces. Trailing whitespace (e.g. before a stripped comment) is not
/// part of the value.
std::string tail_value(int line, const std::string& raw,
                       const std::string& key) {
  const std::string marker = key + "=";
  auto pos = raw.find(marker);
  if (pos == std::string::npos) {
    throw ScenarioParseError(line, "expected " + key + "=<...>");
  }
  return rtrim(raw.substr(pos + marker.size()));
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  std::string line;
  int lineno = 0;
  bool saw_action = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    std::string body = hash == std::string::npos ? line : line.substr(0, hash);
    auto toks = split_ws(body);
    if (toks.empty()) continue;
    const std::string& cmd = toks[0];

    auto require_config_position = [&]() {
      if (saw_action) {
        throw ScenarioParseError(lineno,
                                 cmd + " must appear before any action");
      }
    };

    if (cmd == "replicas") {
      require_config_position();
      if (toks.size() != 2) throw ScenarioParseError(lineno, "replicas <n>");
      sc.replicas = static_cast<std::uint32_t>(parse_uint(lineno, toks[1]));
      if (sc.replicas == 0) throw ScenarioParseError(lineno, "replicas >= 1");
    } else if (cmd == "mode") {
      require_config_position();
      if (toks.size() != 2) throw ScenarioParseError(lineno, "mode lww|undo");
      if (toks[1] == "lww") sc.mode = Mode::lww;
      else if (toks[1] == "undo") sc.mode = Mode::undo;
      else throw ScenarioParseError(lineno, "mode must be lww or undo");
    } else if (cmd == "k") {
      require_config_position();
      if (toks.size() != 2) throw ScenarioParseError(lineno, "k <int>");
      sc.k = parse_uint(lineno, toks[1]);
    } else if (cmd == "seed") {
      require_config_position();
      if (toks.size() != 2) throw ScenarioParseError(lineno, "seed <int>");
      sc.seed = parse_uint(lineno, toks[1]);
    } else if (cmd == "add" || cmd == "text") {
      saw_action = true;
      if (toks.size() < 4) {
        throw ScenarioParseError(
            lineno, cmd + " <site> parent=<c,s> after=<c,s|start> ...");
      }
      std::uint32_t site =
          static_cast<std::uint32_t>(parse_uint(lineno, toks[1]));
      Timestamp parent = parse_ts(lineno, expect_kv(lineno, toks, 2, "parent"));
      std::string after_text = expect_kv(lineno, toks, 3, "after");
      std::optional<Timestamp> after;
      if (after_text != "start") after = parse_ts(lineno, after_text);
      if (cmd == "add") {
        std::string tag = expect_kv(lineno, toks, 4, "tag");
        sc.steps.emplace_back(lineno, AddStep{site, parent, after, tag});
      } else {
        std::string value = tail_value(lineno, body, "value");
        sc.steps.emplace_back(lineno, TextStep{site, parent, after, value});
      }
    } else if (cmd == "del") {
      saw_action = true;
      if (toks.size() != 3) {
        throw ScenarioParseError(lineno, "del <site> target=<c,s>");
      }
      std::uint32_t site =
          static_cast<std::uint32_t>(parse_uint(lineno, toks[1]));
      Timestamp target = parse_ts(lineno, expect_kv(lineno, toks, 2, "target"));
      sc.steps.emplace_back(lineno, DelStep{site, target});
    } else if (cmd == "setattr") {
      saw_action = true;
      if (toks.size() < 5) {
        throw ScenarioParseError(
            lineno, "setattr <site> target=<c,s> name=<attr> value=<...>");
      }
      std::uint32_t site =
          static_cast<std::uint32_t>(parse_uint(lineno, toks[1]));
      Timestamp target = parse_ts(lineno, expect_kv(lineno, toks, 2, "target"));
      std::string name = expect_kv(lineno, toks, 3, "name");
      std::string value = tail_value(lineno, body, "value");
      std::optional<std::string> v;
      if (value != "nil") v = value;
      sc.steps.emplace_back(lineno, SetAttrStep{site, target, name, v});
    } else if (cmd == "undo" || cmd == "redo") {
      saw_action = true;
      if (toks.size() != 3) {
        throw ScenarioParseError(lineno, cmd + " <site> op=<c,s>");
      }
      std::uint32_t site =
          static_cast<std::uint32_t>(parse_uint(lineno, toks[1]));
      Timestamp op = parse_ts(lineno, expect_kv(lineno, toks, 2, "op"));
      if (cmd == "undo") sc.steps.emplace_back(lineno, UndoStep{site, op});
      else sc.steps.emplace_back(lineno, RedoStep{site, op});
    } else if (cmd == "deliver") {
      saw_action = true;
      if (toks.size() < 3) {
        throw ScenarioParseError(lineno,
                                 "deliver <to> from=<site> [count=<n>|all]");
      }
      DeliverStep step;
      step.to = static_cast<std::uint32_t>(parse_uint(lineno, toks[1]));
      step.from = static_cast<std::uint32_t>(
          parse_uint(lineno, expect_kv(lineno, toks, 2, "from")));
      if (toks.size() > 3) {
        if (toks[3] == "all") step.count = 0;
        else {
          step.count = static_cast<std::uint32_t>(
              parse_uint(lineno, expect_kv(lineno, toks, 3, "count")));
        }
      }
      sc.steps.emplace_back(lineno, step);
    } else if (cmd == "deliver-all") {
      saw_action = true;
      sc.steps.emplace_back(lineno, DeliverAllStep{});
    } else if (cmd == "heartbeat" || cmd == "purge") {
      saw_action = true;
      if (toks.size() != 2) {
        throw ScenarioParseError(lineno, cmd + " <site>");
      }
      std::uint32_t site =
          static_cast<std::uint32_t>(parse_uint(lineno, toks[1]));
      if (cmd == "heartbeat") sc.steps.emplace_back(lineno, HeartbeatStep{site});
      else sc.steps.emplace_back(lineno, PurgeStep{site});
    } else if (cmd == "assert-converged") {
      saw_action = true;
      sc.steps.emplace_back(lineno, AssertConvergedStep{});
    } else if (cmd == "assert-render") {
      saw_action = true;
      if (toks.size() < 3) {
        throw ScenarioParseError(lineno, "assert-render <site> <xml>");
      }
      std::uint32_t site =
          static_cast<std::uint32_t>(parse_uint(lineno, toks[1]));
      auto pos = body.find("assert-render") + std::string("assert-render").size();
      pos = body.find_first_not_of(" \t", pos);        // site token
      pos = body.find_first_of(" \t", pos);            // end of site
      pos = body.find_first_not_of(" \t", pos);        // xml start
      sc.steps.emplace_back(lineno,
                            AssertRenderStep{site, rtrim(body.substr(pos))});
    } else {
      throw ScenarioParseError(lineno, "unknown command '" + cmd + "'");
    }
  }
  return sc;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open scenario file: " + path);
  }
  return parse_scenario(in);
}

ScenarioRunner::ScenarioRunner(const Scenario& scenario, ReplayOptions opts)
    : scenario_(scenario),
      opts_(opts),
      sim_(Simulation::Config{scenario.replicas, scenario.mode, scenario.k,
                              /*fifo=*/true, /*track_gc=*/true}) {}

ReplayResult ScenarioRunner::run(std::ostream& diag) {
  ReplayResult result;
  for (const auto& [line, step] : scenario_.steps) {
    try {
      std::visit(
          [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, AddStep>) {
              Timestamp id = sim_.local_add(s.site, s.parent, s.after, s.tag);
              diag << "line " << line << ": add " << to_string(id) << "\n";
            } else if constexpr (std::is_same_v<T, TextStep>) {
              Timestamp id = sim_.local_text(s.site, s.parent, s.after, s.value);
              diag << "line " << line << ": text " << to_string(id) << "\n";
            } else if constexpr (std::is_same_v<T, DelStep>) {
              sim_.local_del(s.site, s.target);
            } else if constexpr (std::is_same_v<T, SetAttrStep>) {
              sim_.local_set_attr(s.site, s.target, s.name, s.value);
            } else if constexpr (std::is_same_v<T, UndoStep>) {
              sim_.local_undo(s.site, s.op);
            } else if constexpr (std::is_same_v<T, RedoStep>) {
              sim_.local_redo(s.site, s.op);
            } else if constexpr (std::is_same_v<T, DeliverStep>) {
              std::uint32_t left = s.count == 0 ? UINT32_MAX : s.count;
              while (left-- > 0 &&
                     sim_.deliver_next(s.from, s.to) ==
                         Simulation::Outcome::delivered) {
              }
            } else if constexpr (std::is_same_v<T, DeliverAllStep>) {
              sim_.deliver_all();
            } else if constexpr (std::is_same_v<T, HeartbeatStep>) {
              sim_.heartbeat(s.site);
            } else if constexpr (std::is_same_v<T, PurgeStep>) {
              std::string before;
              if (opts_.gc_checks) before = sim_.render_site(s.site);
              PurgeStats stats = sim_.purge_replica(s.site);
              result.purged_items += stats.total();
              if (opts_.gc_checks) {
                std::string after = sim_.render_site(s.site);
                ++result.assertions;
                if (before != after) {
                  throw std::runtime_error(
                      "purge changed render at site " + std::to_string(s.site) +
                      ": before=" + before + " after=" + after);
                }
                diag << "line " << line << ": purge site " << s.site
                     << " removed " << stats.total()
                     << " item(s), render preserved\n";
              }
            } else if constexpr (std::is_same_v<T, AssertConvergedStep>) {
              ++result.assertions;
              if (!sim_.converged()) {
                std::string detail;
                for (std::uint32_t site : sim_.sites()) {
                  detail += "\n  site " + std::to_string(site) + ": " +
                            sim_.render_site(site);
                }
                throw std::runtime_error("replicas diverged:" + detail);
              }
              diag << "line " << line << ": assert-converged ok\n";
            } else if constexpr (std::is_same_v<T, AssertRenderStep>) {
              ++result.assertions;
              std::string actual = sim_.render_site(s.site);
              if (actual != s.xml) {
                throw std::runtime_error("render mismatch at site " +
                                         std::to_string(s.site) +
                                         "\n  expected: " + s.xml +
                                         "\n  actual:   " + actual);
              }
              diag << "line " << line << ": assert-render ok\n";
            }
          },
          step);
    } catch (const std::exception& e) {
      result.ok = false;
      result.failed_line = line;
      result.message = e.what();
      diag << "line " << line << ": FAILED: " << e.what() << "\n";
      return result;
    }
  }
  return result;
}

}  // namespace xmlcrdt::sim

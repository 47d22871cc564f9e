#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "distill/ingest.hpp"

namespace distill {

enum class ScenarioKind {
  Darpa,          // sadmind intrusion plus background noise, about 7000 alerts
  Enterprise,     // many independent host groups, about 77000 alerts
  TemplateTable,  // only the three sadmind/telnet sources with fixed count profiles
};

std::string_view scenario_kind_name(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text);

struct ScenarioOptions {
  ScenarioKind kind = ScenarioKind::Darpa;
  std::uint64_t seed = 1;
  // Darpa: hosts swept by the portmap probe (>= 4), hosts hit by background
  // scans and hosts making outbound noise (>= 20 each).
  std::size_t probed_hosts = 8;
  std::size_t scan_hosts = 60;
  std::size_t client_hosts = 40;
  // Enterprise: independent host groups, one intrusion each.
  std::size_t groups = 60;
  // Non-alert EVE records mixed in (flow events); ingest skips them.
  std::size_t flow_records = 100;
};

/// What the generator knows about its own output.
struct ScenarioTruth {
  std::size_t alerts = 0;
  std::size_t templates = 0;  // distinct generalized alerts at gl = 2
  std::size_t incidents = 0;
  std::vector<std::string> chain;  // signatures of the intrusion chain, in order
};

struct Scenario {
  std::vector<std::string> records;  // EVE lines, time ordered
  IngestConfig config;
  ScenarioTruth truth;
};

Scenario generate_scenario(const ScenarioOptions& options);

/// alerts.json, tactics.map, scores.map, network.conf and truth.txt under `dir`.
void write_scenario(const Scenario& scenario, const std::filesystem::path& dir);
ScenarioTruth parse_truth(std::string_view text);

}  // namespace distill

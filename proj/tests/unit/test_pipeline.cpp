#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "distill/codec.hpp"
#include "distill/error.hpp"
#include "distill/pipeline.hpp"
#include "distill/scenario.hpp"

using namespace distill;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// scenario files plus a config carrying its ingest tables
PipelineConfig prepare(const Scenario& s, const fs::path& dir) {
  write_scenario(s, dir);
  PipelineConfig config;
  config.ingest = s.config;
  return config;
}

std::size_t member_count(const std::vector<GeneralizedAlert>& gs) {
  std::size_t n = 0;
  for (const auto& g : gs) n += g.members.size();
  return n;
}

}  // namespace

TEST_CASE("empty input runs to zero counts") {
  fixtures::TempDir tmp("empty");
  {
    std::ofstream(tmp / "alerts.json") << "";
  }
  PipelineConfig config;
  auto result = run_pipeline(config, {tmp / "alerts.json"}, tmp / "run");
  CHECK(result.incidents.empty());
  CHECK(result.report.raw_alerts == 0);
  CHECK(result.report.generalized == 0);
  CHECK(result.report.partition_status == "empty");
  const auto report = slurp(tmp / "run" / "report.txt");
  CHECK(report.find("templating_reduction = n/a") != std::string::npos);
  CHECK(fs::exists(tmp / "run" / layout::kIncidents / "index.json"));
}

TEST_CASE("enterprise scenario reduces at both stages") {
  fixtures::TempDir tmp("enterprise");
  ScenarioOptions so;
  so.kind = ScenarioKind::Enterprise;
  so.seed = 3;
  so.groups = 12;
  const auto s = generate_scenario(so);
  auto config = prepare(s, tmp.path());
  auto result = run_pipeline(config, {tmp / "alerts.json"}, tmp / "run");
  const auto& r = result.report;
  CAPTURE(r.to_text());
  CHECK(r.raw_alerts == s.truth.alerts);
  CHECK(r.skipped == so.flow_records);
  CHECK(r.rejected == 0);
  CHECK(r.raw_alerts >= 10 * r.generalized);
  CHECK(r.generalized >= 10 * r.incidents);
  CHECK(r.incidents >= 1);

  // every raw alert lands in exactly one generalized alert
  auto generalized = load_generalized(tmp / "run");
  CHECK(member_count(generalized) == r.raw_alerts);
  std::set<std::string> seen;
  for (const auto& g : generalized)
    for (const auto& m : g.members) CHECK(seen.insert(m).second);

  CHECK(result.incidents.size() <= generalized.size());
  for (std::size_t i = 1; i < result.incidents.size(); ++i)
    CHECK(result.incidents[i - 1].top_score() >= result.incidents[i].top_score());
}

TEST_CASE("reruns produce identical artifacts") {
  fixtures::TempDir tmp("rerun");
  ScenarioOptions so;
  so.seed = 11;
  so.scan_hosts = 20;
  so.client_hosts = 20;
  auto config = prepare(generate_scenario(so), tmp.path());
  run_pipeline(config, {tmp / "alerts.json"}, tmp / "a");
  config.jobs = 3;
  run_pipeline(config, {tmp / "alerts.json"}, tmp / "b");
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(tmp / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), tmp / "a");
    CAPTURE(rel.string());
    CHECK(slurp(e.path()) == slurp(tmp / "b" / rel));
    ++files;
  }
  CHECK(files > 5);

  // stage loaders read back what the run wrote
  auto graph = load_graph(tmp / "a");
  auto partition = load_partition(tmp / "a", graph);
  auto again = stage_score(graph, partition, config, {});
  auto stored = load_incidents(tmp / "a");
  REQUIRE(again.size() == stored.size());
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(incident_to_json(again[i]) == incident_to_json(stored[i]));
  CHECK(member_count(load_generalized(tmp / "a")) == load_alerts(tmp / "a").size());
  CHECK(load_run_config(tmp / "a").serialize() == PipelineConfig{}.serialize());
}

TEST_CASE("config snapshots") {
  PipelineConfig c;
  c.apply("schema = 1\nthreshold = 0.55\nmode = exact\nmax-card = 7\ncover = off\ngl 2101911 = 1\ntime-window = 30\n");
  CHECK(c.threshold == 0.55);
  CHECK(c.mode == PartitionMode::Exact);
  CHECK(c.partition.max_card == 7);
  CHECK_FALSE(c.partition.cover);
  CHECK(c.gl.by_source.at("2101911") == 1);
  REQUIRE(c.time_window);
  CHECK(c.time_window->count() == 30'000'000);

  PipelineConfig back;
  back.apply(c.serialize());
  CHECK(back.serialize() == c.serialize());

  PipelineConfig d;
  CHECK(d.partition.cover);
  CHECK(d.partition.max_card == 20);
  CHECK_THROWS_AS(d.apply("schema = 1\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(d.set("mode", "fastest"), ConfigError);
  CHECK_THROWS_AS(d.set("false-indication", "1.5"), ConfigError);
  CHECK_THROWS_AS(d.set("threshold", "abc"), ConfigError);
}

TEST_CASE("stage failures carry the stage name") {
  fixtures::TempDir tmp("stage");
  PipelineConfig config;
  try {
    stage_ingest({tmp / "missing.json"}, config, {});
    FAIL("expected a failure");
  } catch (const StageError& e) {
    CHECK(e.stage() == "ingest");
    CHECK(std::string(e.what()).rfind("[ingest]", 0) == 0);
  }

  // an exact solve too large for the integer cap fails in the partition stage
  std::vector<GeneralizedAlert> nodes;
  for (int i = 0; i < 30; ++i)
    nodes.push_back(fixtures::node("g" + std::to_string(i), {i % 2 ? Tactic::Execution : Tactic::InitialAccess}, {"10.0.0.1"}, i));
  config.mode = PartitionMode::Exact;
  config.milp.max_integers = 50;
  auto graph = stage_graph(nodes, config, {});
  REQUIRE_FALSE(graph.edges.empty());
  try {
    stage_partition(graph, config, {});
    FAIL("expected a failure");
  } catch (const StageError& e) {
    CHECK(e.stage() == "partition");
    CHECK(exit_code(e.kind()) == 3);
  }
  CHECK_THROWS_AS(load_generalized(tmp.path()), DataError);
}

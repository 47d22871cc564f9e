// distill: command line front end for the incident pipeline.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "distill/codec.hpp"
#include "distill/error.hpp"
#include "distill/keyvalue.hpp"
#include "distill/pipeline.hpp"
#include "distill/scenario.hpp"
#include "distill/service.hpp"

namespace fs = std::filesystem;
using namespace distill;

namespace {

// Values given on the command line, keyed like config.txt. They are applied
// after --config so flags always win.
struct Overrides {
  std::map<std::string, std::string> values;
  std::vector<std::string> gl_sources;  // "SOURCE=N"
  std::string config_file;
  std::string transitions_file;
  unsigned jobs = 0;

  void apply(PipelineConfig& config) const {
    if (!config_file.empty()) config.apply(read_file(config_file), config_file);
    if (!transitions_file.empty()) config.transitions = TransitionMatrix::load(transitions_file);
    for (const auto& [key, value] : values) config.set(key, value);
    for (const auto& entry : gl_sources) {
      const auto eq = entry.rfind('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--gl expects SOURCE=LEVEL, got '" + entry + "'");
      config.set("gl " + entry.substr(0, eq), entry.substr(eq + 1));
    }
    if (jobs != 0) config.jobs = jobs;
  }
};

std::map<std::string, std::string> default_values() {
  std::map<std::string, std::string> out;
  for (const auto& e : KeyValueDocument::parse(PipelineConfig{}.serialize(), "defaults").entries) out[e.key] = e.value;
  return out;
}

void add_value(CLI::App* app, Overrides& o, const std::string& key, const std::string& help) {
  static const auto defaults = default_values();
  auto* opt = app->add_option_function<std::string>(
      "--" + key, [&o, key](const std::string& v) { o.values[key] = v; }, help);
  if (auto it = defaults.find(key); it != defaults.end()) opt->default_str(it->second);
}

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_file, "Config file of 'key = value' lines (same keys as the flags)")
      ->check(CLI::ExistingFile);
  app->add_option("--jobs", o.jobs, "Worker threads (0: all cores)")->default_str("1");
}

void add_template_flags(CLI::App* app, Overrides& o) {
  add_value(app, o, "gl-signature", "Generalization rounds for IDS signature sources");
  add_value(app, o, "gl-anomaly", "Generalization rounds for anomaly (UEBA) sources");
  add_value(app, o, "gl-custom", "Generalization rounds for custom sources");
  app->add_option("--gl", o.gl_sources, "Per-source override, SOURCE=LEVEL (repeatable)");
}

void add_graph_flags(CLI::App* app, Overrides& o) {
  add_value(app, o, "threshold", "Edge threshold on alert correlation, in (0, 1)");
  add_value(app, o, "time-window", "Largest start-time gap of an edge in seconds, or 'none'");
  app->add_option("--transitions", o.transitions_file, "Tactic transition matrix CSV")->check(CLI::ExistingFile);
}

void add_partition_flags(CLI::App* app, Overrides& o) {
  add_value(app, o, "mode", "exact | relaxed | community | auto");
  add_value(app, o, "k", "Incident columns (0: ceil(nodes / max-card))");
  add_value(app, o, "max-memb", "Incidents an alert may belong to");
  add_value(app, o, "max-card", "Alerts per incident");
  add_value(app, o, "gamma0", "Weight of the cut and size term");
  add_value(app, o, "gamma1", "Weight of the missing-tactic term");
  add_value(app, o, "gamma2", "Weight of the asset-count term");
  add_value(app, o, "tactic-penalty", "Missing-tactic penalty: inf | one");
  app->add_flag_callback("--cover", [&o] { o.values["cover"] = "on"; }, "Every connected alert must land in an incident (default)");
  app->add_flag_callback("--no-cover", [&o] { o.values["cover"] = "off"; }, "Allow connected alerts to be left out");
  add_value(app, o, "max-integers", "Largest exact solve, in binary variables");
  add_value(app, o, "node-limit", "Branch-and-bound node limit");
}

void add_score_flags(CLI::App* app, Overrides& o) {
  add_value(app, o, "inference", "exact | bp");
  add_value(app, o, "false-indication", "Transition factor value when both tactics are inactive");
  add_value(app, o, "bp-max-iterations", "Sum-product iteration cap");
  add_value(app, o, "bp-damping", "Sum-product damping on graphs with cycles");
  add_value(app, o, "bp-tolerance", "Sum-product convergence tolerance");
}

// Run-directory config, then --config, then flags.
PipelineConfig stage_config(const fs::path& run_dir, const Overrides& o) {
  PipelineConfig config = load_run_config(run_dir);
  o.apply(config);
  return config;
}

void save_config(const fs::path& run_dir, const PipelineConfig& config) {
  write_file((run_dir / "config.txt").string(), config.serialize());
  write_file((run_dir / "transition_matrix.csv").string(), config.transitions.to_csv());
}

// Ingest tables: --ingest-config, else an input directory that carries them.
IngestConfig resolve_ingest(const std::vector<std::string>& inputs, const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return IngestConfig::load_dir(explicit_dir);
  for (const auto& in : inputs) {
    const fs::path dir(in);
    if (fs::is_directory(dir) && (fs::exists(dir / "tactics.map") || fs::exists(dir / "scores.map") ||
                                  fs::exists(dir / "network.conf")))
      return IngestConfig::load_dir(dir);
  }
  return {};
}

std::vector<fs::path> to_paths(const std::vector<std::string>& inputs) { return {inputs.begin(), inputs.end()}; }

void print_incidents(const std::vector<Incident>& incidents, std::size_t limit = 10) {
  std::size_t shown = 0;
  for (const auto& inc : incidents) {
    if (shown++ == limit) {
      std::cout << "  ... " << incidents.size() - limit << " more\n";
      break;
    }
    std::printf("  %s  top %.4f  nodes %zu  edges %zu  tactics %s\n", inc.id.c_str(), inc.top_score(), inc.nodes.size(),
                inc.edges.size(), inc.tactics.to_string().c_str());
  }
}

double max_bp_deviation(std::vector<Incident> incidents, const PipelineConfig& config) {
  double worst = 0.0;
  for (auto& inc : incidents) {
    const auto fg = incident_factor_graph(inc, config.transitions, config.scoring.false_indication);
    const auto exact = infer_exact(fg);
    const auto bp = infer_sum_product(fg, config.scoring.sum_product);
    for (const auto& [t, p] : exact.marginals) worst = std::max(worst, std::abs(p - bp.marginals.at(t)));
  }
  return worst;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Turns raw security alerts into scored, tactic-aware incidents."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "distill 0.1.0");

  Overrides o;
  std::vector<std::string> inputs;
  std::string out_dir, run_dir, ingest_dir, model_file;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse alert files into 01_alerts/");
  ingest->add_option("--input", inputs, "Alert files or directories (*.json, *.jsonl)")->required();
  ingest->add_option("--out", out_dir, "Run directory")->required();
  ingest->add_option("--ingest-config", ingest_dir, "Directory with tactics.map, scores.map, network.conf");
  add_common(ingest, o);

  auto* learn = app.add_subcommand("templates-learn", "Learn templates and generalize alerts into 02_generalized/");
  learn->add_option("--run", run_dir, "Run directory")->required();
  add_common(learn, o);
  add_template_flags(learn, o);

  auto* merge = app.add_subcommand("merge", "Apply a learned templates.model to the alerts of a run");
  merge->add_option("--run", run_dir, "Run directory")->required();
  merge->add_option("--model", model_file, "templates.model from an earlier run")->required()->check(CLI::ExistingFile);
  add_common(merge, o);

  auto* graph = app.add_subcommand("graph", "Build the alert graph into 03_graph/");
  graph->add_option("--run", run_dir, "Run directory")->required();
  add_common(graph, o);
  add_graph_flags(graph, o);

  auto* partition = app.add_subcommand("partition", "Split the graph into incident columns (04_partitions/)");
  partition->add_option("--run", run_dir, "Run directory")->required();
  add_common(partition, o);
  add_partition_flags(partition, o);

  bool compare_exact = false;
  auto* score = app.add_subcommand("score", "Score incidents into 05_incidents/");
  score->add_option("--run", run_dir, "Run directory")->required();
  score->add_flag("--compare-exact", compare_exact, "Also print the largest sum-product deviation from enumeration");
  add_common(score, o);
  add_score_flags(score, o);

  auto* run = app.add_subcommand("run", "All stages end to end");
  run->add_option("--input", inputs, "Alert files or directories")->required();
  run->add_option("--out", out_dir, "Run directory")->required();
  run->add_option("--ingest-config", ingest_dir, "Directory with tactics.map, scores.map, network.conf");
  run->add_flag("--compare-exact", compare_exact, "Also print the largest sum-product deviation from enumeration");
  add_common(run, o);
  add_template_flags(run, o);
  add_graph_flags(run, o);
  add_partition_flags(run, o);
  add_score_flags(run, o);

  ScenarioOptions scenario;
  std::string kind = "darpa";
  auto* generate = app.add_subcommand("generate-scenario", "Write a seeded synthetic alert scenario");
  generate->add_option("--out", out_dir, "Output directory")->required();
  generate->add_option("--kind", kind, "darpa | enterprise | template-table")->capture_default_str();
  generate->add_option("--seed", scenario.seed, "Random seed")->capture_default_str();
  generate->add_option("--probed-hosts", scenario.probed_hosts, "darpa: hosts swept by the portmap probe")
      ->capture_default_str();
  generate->add_option("--scan-hosts", scenario.scan_hosts, "darpa: hosts hit by background scans")->capture_default_str();
  generate->add_option("--client-hosts", scenario.client_hosts, "darpa: hosts sending outbound noise")
      ->capture_default_str();
  generate->add_option("--groups", scenario.groups, "enterprise: host groups, one intrusion each")->capture_default_str();
  generate->add_option("--flow-records", scenario.flow_records, "Non-alert records mixed in")->capture_default_str();

  ServeOptions serve_options;
  std::string data_dir, sidecar;
  bool demo = false;
  auto* serve_cmd = app.add_subcommand("serve", "Serve incidents and analyst evidence over HTTP");
  serve_cmd->add_option("--data", data_dir, "Run directory (or 05_incidents directory) to serve")->envname("DISTILL_DATA");
  serve_cmd->add_flag("--demo", demo, "Serve the three-alert evidence demo incident");
  serve_cmd->add_option("--host", serve_options.host, "Listen address")->envname("DISTILL_HOST")->capture_default_str();
  serve_cmd->add_option("--port", serve_options.port, "Listen port (0: any free port)")
      ->envname("DISTILL_PORT")
      ->capture_default_str();
  serve_cmd->add_option("--ui", serve_options.ui_dir, "Built UI bundle served under /ui/");
  serve_cmd->add_option("--evidence-file", sidecar, "Evidence sidecar (default: <data>/evidence.json)");
  serve_cmd->add_option("--threads", serve_options.threads, "HTTP worker threads")->capture_default_str();
  add_common(serve_cmd, o);
  add_score_flags(serve_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::Usage);
  }

  if (ingest->parsed()) {
    PipelineConfig config;
    config.ingest = resolve_ingest(inputs, ingest_dir);
    o.apply(config);
    const auto result = stage_ingest(to_paths(inputs), config, out_dir);
    save_config(out_dir, config);
    std::printf("alerts %zu  rejected %zu  skipped %zu\n", result.alerts.size(), result.rejects.size(), result.skipped);
  } else if (learn->parsed()) {
    const auto config = stage_config(run_dir, o);
    const auto result = stage_templates(load_alerts(run_dir), config, run_dir);
    save_config(run_dir, config);
    std::printf("generalized alerts %zu  sources %zu\n", result.generalized.size(), result.model.sources.size());
  } else if (merge->parsed()) {
    const auto config = stage_config(run_dir, o);
    const auto generalized = stage_merge(load_alerts(run_dir), TemplateModel::load(model_file), config, run_dir);
    std::printf("generalized alerts %zu\n", generalized.size());
  } else if (graph->parsed()) {
    const auto config = stage_config(run_dir, o);
    const auto g = stage_graph(load_generalized(run_dir), config, run_dir);
    save_config(run_dir, config);
    std::printf("nodes %zu  edges %zu\n", g.size(), g.edges.size());
  } else if (partition->parsed()) {
    const auto config = stage_config(run_dir, o);
    const auto report = stage_partition(load_graph(run_dir), config, run_dir);
    save_config(run_dir, config);
    std::size_t used = 0;
    for (const auto& c : report.partition.columns) used += !c.empty();
    std::printf("status %s  columns %zu  objective %.6g  lower bound %.6g\n",
                std::string(partition_status_name(report.partition.status)).c_str(), used, report.partition.objective,
                report.partition.lower_bound);
  } else if (score->parsed()) {
    const auto config = stage_config(run_dir, o);
    const auto g = load_graph(run_dir);
    const auto incidents = stage_score(g, load_partition(run_dir, g), config, run_dir);
    save_config(run_dir, config);
    std::printf("incidents %zu\n", incidents.size());
    print_incidents(incidents);
    if (compare_exact) std::printf("max |bp - exact| %.3g\n", max_bp_deviation(incidents, config));
  } else if (run->parsed()) {
    PipelineConfig config;
    config.ingest = resolve_ingest(inputs, ingest_dir);
    o.apply(config);
    const auto result = run_pipeline(config, to_paths(inputs), out_dir);
    const auto& r = result.report;
    std::printf("raw alerts %zu -> generalized alerts %zu -> incidents %zu\n", r.raw_alerts, r.generalized, r.incidents);
    std::printf("rejected %zu  skipped %zu  edges %zu  partition %s\n", r.rejected, r.skipped, r.graph_edges,
                r.partition_status.c_str());
    print_incidents(result.incidents);
    std::cout << r.timings_text();
    if (compare_exact) std::printf("max |bp - exact| %.3g\n", max_bp_deviation(result.incidents, config));
  } else if (generate->parsed()) {
    auto k = parse_scenario_kind(kind);
    if (!k) throw ConfigError("unknown scenario kind '" + kind + "'");
    scenario.kind = *k;
    const auto s = generate_scenario(scenario);
    write_scenario(s, out_dir);
    std::printf("alerts %zu  expected generalized alerts %zu  expected incidents %zu\n", s.truth.alerts,
                s.truth.templates, s.truth.incidents);
  } else if (serve_cmd->parsed()) {
    if (demo == !data_dir.empty()) throw ConfigError("give exactly one of --data or --demo");
    PipelineConfig config = data_dir.empty() ? PipelineConfig{} : stage_config(data_dir, Overrides{});
    o.apply(config);
    fs::path evidence = sidecar;
    if (evidence.empty() && !data_dir.empty()) evidence = fs::path(data_dir) / "evidence.json";
    SessionStore store(config.transitions, config.scoring, evidence);
    store.load(demo ? std::vector<Incident>{demo_incident(config.transitions)} : load_incidents(data_dir));
    HttpService service(store, serve_options);
    const int port = service.bind();
    std::printf("serving %zu incidents on http://%s:%d\n", store.list().size(), serve_options.host.c_str(), port);
    std::fflush(stdout);
    service.run();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const Error& e) {
    std::cerr << "distill: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "distill: internal error: " << e.what() << "\n";
    return exit_code(ErrorKind::Internal);
  }
}

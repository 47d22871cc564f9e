#include "distill/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "distill/codec.hpp"
#include "distill/error.hpp"
#include "distill/keyvalue.hpp"

namespace distill {

namespace {

namespace fs = std::filesystem;

double real_value(const std::string& key, const std::string& value) {
  auto v = parse_real(trim(value));
  if (!v || !std::isfinite(*v)) throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  return *v;
}

long long integer_value(const std::string& key, const std::string& value) {
  const double v = real_value(key, value);
  if (v != std::floor(v) || v < 0) throw ConfigError("'" + key + "' expects a non-negative integer, got '" + value + "'");
  return static_cast<long long>(v);
}

bool flag_value(const std::string& key, const std::string& value) {
  const auto v = trim(value);
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("'" + key + "' expects on or off, got '" + value + "'");
}

std::string on_off(bool v) { return v ? "on" : "off"; }

template <class F>
auto in_stage(const char* stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  } catch (const std::exception& e) {
    throw StageError(stage, InternalError(e.what()));
  }
}

std::string read_required(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("missing artifact " + path.string());
  return read_file(path.string());
}

}  // namespace

std::string PipelineConfig::serialize() const {
  std::string out = "schema = 1\n";
  auto put = [&](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };
  put("threshold", format_real(threshold));
  put("time-window", time_window ? format_real(static_cast<double>(time_window->count()) / 1e6) : "none");
  put("mode", std::string(partition_mode_name(mode)));
  put("k", std::to_string(partition.k));
  put("max-memb", std::to_string(partition.max_memb));
  put("max-card", std::to_string(partition.max_card));
  put("gamma0", format_real(partition.gamma0));
  put("gamma1", format_real(partition.gamma1));
  put("gamma2", format_real(partition.gamma2));
  put("tactic-penalty", std::string(tactic_penalty_name(partition.tactic_penalty)));
  put("cover", on_off(partition.cover));
  put("max-integers", std::to_string(milp.max_integers));
  put("node-limit", std::to_string(milp.node_limit));
  put("inference", std::string(inference_mode_name(scoring.inference)));
  put("false-indication", format_real(scoring.false_indication));
  put("bp-max-iterations", std::to_string(scoring.sum_product.max_iterations));
  put("bp-damping", format_real(scoring.sum_product.damping));
  put("bp-tolerance", format_real(scoring.sum_product.tolerance));
  put("gl-signature", std::to_string(gl.signature));
  put("gl-anomaly", std::to_string(gl.anomaly));
  put("gl-custom", std::to_string(gl.custom));
  for (const auto& [source, level] : gl.by_source) put("gl " + source, std::to_string(level));
  return out;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "threshold") {
    threshold = real_value(key, value);
  } else if (key == "time-window") {
    if (trim(value) == "none") {
      time_window.reset();
    } else {
      const double seconds = real_value(key, value);
      if (seconds < 0) throw ConfigError("'time-window' must be non-negative");
      time_window = std::chrono::microseconds{std::llround(seconds * 1e6)};
    }
  } else if (key == "mode") {
    auto m = parse_partition_mode(trim(value));
    if (!m) throw ConfigError("unknown partition mode '" + value + "'");
    mode = *m;
  } else if (key == "k") {
    partition.k = static_cast<std::size_t>(integer_value(key, value));
  } else if (key == "max-memb") {
    partition.max_memb = static_cast<int>(integer_value(key, value));
  } else if (key == "max-card") {
    partition.max_card = static_cast<int>(integer_value(key, value));
  } else if (key == "gamma0") {
    partition.gamma0 = real_value(key, value);
  } else if (key == "gamma1") {
    partition.gamma1 = real_value(key, value);
  } else if (key == "gamma2") {
    partition.gamma2 = real_value(key, value);
  } else if (key == "tactic-penalty") {
    auto p = parse_tactic_penalty(trim(value));
    if (!p) throw ConfigError("unknown tactic penalty '" + value + "' (inf or one)");
    partition.tactic_penalty = *p;
  } else if (key == "cover") {
    partition.cover = flag_value(key, value);
  } else if (key == "max-integers") {
    milp.max_integers = static_cast<std::size_t>(integer_value(key, value));
  } else if (key == "node-limit") {
    milp.node_limit = static_cast<std::size_t>(integer_value(key, value));
  } else if (key == "inference") {
    auto m = parse_inference_mode(trim(value));
    if (!m) throw ConfigError("unknown inference mode '" + value + "' (exact or bp)");
    scoring.inference = *m;
  } else if (key == "false-indication") {
    scoring.false_indication = real_value(key, value);
    if (scoring.false_indication < 0 || scoring.false_indication > 1)
      throw ConfigError("'false-indication' must be within [0, 1]");
  } else if (key == "bp-max-iterations") {
    scoring.sum_product.max_iterations = static_cast<std::size_t>(integer_value(key, value));
  } else if (key == "bp-damping") {
    scoring.sum_product.damping = real_value(key, value);
  } else if (key == "bp-tolerance") {
    scoring.sum_product.tolerance = real_value(key, value);
  } else if (key == "gl-signature") {
    gl.signature = static_cast<int>(integer_value(key, value));
  } else if (key == "gl-anomaly") {
    gl.anomaly = static_cast<int>(integer_value(key, value));
  } else if (key == "gl-custom") {
    gl.custom = static_cast<int>(integer_value(key, value));
  } else if (key.rfind("gl ", 0) == 0) {
    const auto source = trim(key.substr(3));
    if (source.empty()) throw ConfigError("'gl' entry without a source id");
    gl.by_source[source] = static_cast<int>(integer_value(key, value));
  } else if (key == "jobs") {
    jobs = static_cast<unsigned>(integer_value(key, value));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void PipelineConfig::apply(std::string_view text, std::string_view name) {
  const auto doc = KeyValueDocument::parse(text, name);
  for (const auto& e : doc.entries) {
    try {
      set(e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(std::string(name) + ":" + std::to_string(e.line) + ": " + err.what());
    }
  }
}

std::string RunReport::to_text() const {
  std::string out = "schema = 1\n";
  auto put = [&](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };
  put("raw_alerts", std::to_string(raw_alerts));
  put("rejected", std::to_string(rejected));
  put("skipped", std::to_string(skipped));
  put("generalized_alerts", std::to_string(generalized));
  put("graph_edges", std::to_string(graph_edges));
  put("incidents", std::to_string(incidents));
  put("partition_status", partition_status);
  put("partition_components", std::to_string(partition_summary.components));
  put("partition_exact_components", std::to_string(partition_summary.exact_components));
  put("partition_relaxed_components", std::to_string(partition_summary.relaxed_components));
  put("partition_objective", format_real(partition_summary.partition.objective));
  put("partition_lower_bound", format_real(partition_summary.partition.lower_bound));
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? std::string("n/a") : format_real(double(a) / double(b)); };
  put("templating_reduction", ratio(raw_alerts, generalized));
  put("partitioning_reduction", ratio(generalized, incidents));
  out += "\n# configuration\n";
  for (const auto& line : split(config, '\n')) {
    if (trim(line).empty() || line.rfind("schema", 0) == 0) continue;
    out += "config " + line + "\n";
  }
  return out;
}

std::string RunReport::timings_text() const {
  std::string out;
  for (const auto& [stage, seconds] : stage_seconds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-12s %10.3f s\n", stage.c_str(), seconds);
    out += buf;
  }
  return out;
}

IngestResult stage_ingest(const std::vector<fs::path>& inputs, const PipelineConfig& config, const fs::path& run_dir) {
  return in_stage("ingest", [&] {
    IngestResult result = ingest_paths(inputs, config.ingest, config.jobs);
    for (const auto& a : result.alerts) validate(a);
    if (!run_dir.empty()) {
      const auto dir = run_dir / layout::kAlerts;
      write_file((dir / "alerts.jsonl").string(), alerts_to_jsonl(result.alerts));
      std::string rejects;
      for (const auto& r : result.rejects) rejects += r.to_line() + "\n";
      write_file((dir / "rejects.jsonl").string(), rejects);
      config.ingest.save_dir(dir);
    }
    return result;
  });
}

TemplatingResult stage_templates(const std::vector<Alert>& alerts, const PipelineConfig& config,
                                 const fs::path& run_dir) {
  return in_stage("templates", [&] {
    const auto catalog = build_catalog(alerts, config.gl);
    auto result = run_templating(alerts, catalog, config.ingest.network, config.jobs);
    if (!run_dir.empty()) {
      const auto dir = run_dir / layout::kGeneralized;
      write_file((dir / "generalized.jsonl").string(), generalized_to_jsonl(result.generalized));
      result.model.save((dir / "templates.model").string());
    }
    return result;
  });
}

std::vector<GeneralizedAlert> stage_merge(const std::vector<Alert>& alerts, const TemplateModel& model,
                                          const PipelineConfig& config, const fs::path& run_dir) {
  return in_stage("merge", [&] {
    for (const auto& a : alerts)
      if (!model.sources.count(a.source)) throw DataError("alert " + a.id + ": source '" + a.source + "' is not in the model");
    auto generalized = apply_model(std::span<const Alert>(alerts), model, config.jobs);
    if (!run_dir.empty()) {
      const auto dir = run_dir / layout::kGeneralized;
      write_file((dir / "generalized.jsonl").string(), generalized_to_jsonl(generalized));
      model.save((dir / "templates.model").string());
    }
    return generalized;
  });
}

AlertGraph stage_graph(std::vector<GeneralizedAlert> generalized, const PipelineConfig& config,
                       const fs::path& run_dir) {
  return in_stage("graph", [&] {
    GraphOptions options;
    options.threshold = config.threshold;
    options.time_window = config.time_window;
    options.jobs = config.jobs;
    auto graph = build_graph(std::move(generalized), config.transitions, options);
    if (!run_dir.empty()) {
      const auto dir = run_dir / layout::kGraph;
      write_file((dir / "graph.tsv").string(), graph_to_tsv(graph));
      write_file((dir / "graph.dot").string(), graph_to_dot(graph));
    }
    return graph;
  });
}

PartitionReport stage_partition(const AlertGraph& graph, const PipelineConfig& config, const fs::path& run_dir) {
  return in_stage("partition", [&] {
    auto report = partition_graph(graph, config.mode, config.partition, config.milp, config.jobs);
    if (!run_dir.empty())
      write_file((run_dir / layout::kPartitions / "partition.txt").string(), partition_to_text(report.partition, graph));
    return report;
  });
}

std::vector<Incident> stage_score(const AlertGraph& graph, const IncidentPartition& partition,
                                  const PipelineConfig& config, const fs::path& run_dir) {
  return in_stage("score", [&] {
    auto incidents = extract_incidents(graph, partition);
    score_incidents(incidents, config.transitions, config.scoring, config.jobs);
    order_incidents(incidents);
    if (!run_dir.empty()) write_incidents(incidents, run_dir / layout::kIncidents);
    return incidents;
  });
}

void write_incidents(const std::vector<Incident>& incidents, const fs::path& incident_dir) {
  if (fs::exists(incident_dir)) {
    for (const auto& entry : fs::directory_iterator(incident_dir))
      if (entry.path().extension() == ".json") fs::remove(entry.path());
  }
  fs::create_directories(incident_dir);
  for (const auto& inc : incidents) write_file((incident_dir / (inc.id + ".json")).string(), incident_to_json(inc) + "\n");
  write_file((incident_dir / "index.json").string(), incident_index_json(incidents) + "\n");
}

RunResult run_pipeline(const PipelineConfig& config, const std::vector<fs::path>& inputs, const fs::path& run_dir) {
  using clock = std::chrono::steady_clock;
  RunResult result;
  RunReport& report = result.report;
  report.config = config.serialize();
  if (!run_dir.empty()) {
    write_file((run_dir / "config.txt").string(), report.config);
    write_file((run_dir / "transition_matrix.csv").string(), config.transitions.to_csv());
  }
  auto timed = [&](const char* stage, auto&& body) {
    const auto start = clock::now();
    auto out = body();
    report.stage_seconds.emplace_back(stage, std::chrono::duration<double>(clock::now() - start).count());
    return out;
  };

  auto ingested = timed("ingest", [&] { return stage_ingest(inputs, config, run_dir); });
  report.raw_alerts = ingested.alerts.size();
  report.rejected = ingested.rejects.size();
  report.skipped = ingested.skipped;

  auto templated = timed("templates", [&] { return stage_templates(ingested.alerts, config, run_dir); });
  report.generalized = templated.generalized.size();

  auto graph = timed("graph", [&] { return stage_graph(std::move(templated.generalized), config, run_dir); });
  report.graph_edges = graph.edges.size();

  auto partitioned = timed("partition", [&] { return stage_partition(graph, config, run_dir); });
  report.partition_status =
      graph.nodes.empty() ? std::string("empty") : std::string(partition_status_name(partitioned.partition.status));

  result.incidents = timed("score", [&] { return stage_score(graph, partitioned.partition, config, run_dir); });
  report.incidents = result.incidents.size();

  report.partition_summary = partitioned;
  report.partition_summary.partition.columns.clear();
  report.partition_summary.partition.diagnostics.clear();
  if (!run_dir.empty()) write_file((run_dir / "report.txt").string(), report.to_text());
  return result;
}

PipelineConfig load_run_config(const fs::path& run_dir) {
  PipelineConfig config;
  if (fs::exists(run_dir / "config.txt")) config.apply(read_file((run_dir / "config.txt").string()), "config.txt");
  if (fs::exists(run_dir / "transition_matrix.csv"))
    config.transitions = TransitionMatrix::load((run_dir / "transition_matrix.csv").string());
  if (fs::exists(run_dir / layout::kAlerts)) config.ingest = IngestConfig::load_dir(run_dir / layout::kAlerts);
  return config;
}

std::vector<Alert> load_alerts(const fs::path& run_dir) {
  return alerts_from_jsonl(read_required(run_dir / layout::kAlerts / "alerts.jsonl"));
}

std::vector<GeneralizedAlert> load_generalized(const fs::path& run_dir) {
  return generalized_from_jsonl(read_required(run_dir / layout::kGeneralized / "generalized.jsonl"));
}

AlertGraph load_graph(const fs::path& run_dir) {
  return graph_from_tsv(read_required(run_dir / layout::kGraph / "graph.tsv"), load_generalized(run_dir));
}

IncidentPartition load_partition(const fs::path& run_dir, const AlertGraph& graph) {
  return partition_from_text(read_required(run_dir / layout::kPartitions / "partition.txt"), graph);
}

std::vector<Incident> load_incidents(const fs::path& dir) {
  fs::path incident_dir = dir;
  if (fs::exists(dir / layout::kIncidents)) incident_dir = dir / layout::kIncidents;
  if (!fs::is_directory(incident_dir)) throw DataError("no incident directory at " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(incident_dir))
    if (entry.path().extension() == ".json" && entry.path().filename() != "index.json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<Incident> incidents;
  for (const auto& f : files) {
    try {
      incidents.push_back(incident_from_json(read_file(f.string())));
    } catch (const DataError& e) {
      throw DataError(f.filename().string() + ": " + e.what());
    }
  }
  std::stable_sort(incidents.begin(), incidents.end(), incident_before);
  return incidents;
}

}  // namespace distill

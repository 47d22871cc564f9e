#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "distill/alert_graph.hpp"
#include "distill/incident.hpp"
#include "distill/ingest.hpp"
#include "distill/partition.hpp"
#include "distill/templating.hpp"
#include "distill/transition_matrix.hpp"

namespace distill {

/// Every tunable of a run. Keys of the text form match the CLI flag names.
struct PipelineConfig {
  IngestConfig ingest;
  GlPolicy gl;
  double threshold = 0.4;
  std::optional<std::chrono::microseconds> time_window;
  PartitionMode mode = PartitionMode::Auto;
  PartitionOptions partition = [] {
    PartitionOptions p;
    p.cover = true;
    return p;
  }();
  MilpOptions milp;
  ScoringOptions scoring;
  TransitionMatrix transitions = default_transition_matrix();
  unsigned jobs = 1;

  /// "key = value" snapshot of the stage parameters (ingest tables and the
  /// transition matrix are stored as separate files).
  std::string serialize() const;
  /// Applies known keys from a snapshot or user config; unknown keys throw
  /// ConfigError.
  void apply(std::string_view text, std::string_view name = "config");
  /// One key at a time, as the CLI and the config file share names.
  void set(const std::string& key, const std::string& value);
};

namespace layout {
inline constexpr const char* kAlerts = "01_alerts";
inline constexpr const char* kGeneralized = "02_generalized";
inline constexpr const char* kGraph = "03_graph";
inline constexpr const char* kPartitions = "04_partitions";
inline constexpr const char* kIncidents = "05_incidents";
}  // namespace layout

struct RunReport {
  std::size_t raw_alerts = 0;
  std::size_t rejected = 0;
  std::size_t skipped = 0;
  std::size_t generalized = 0;
  std::size_t graph_edges = 0;
  std::size_t incidents = 0;
  std::string partition_status;
  PartitionReport partition_summary;  // columns dropped; counts and bounds only
  std::vector<std::pair<std::string, double>> stage_seconds;
  std::string config;  // PipelineConfig::serialize()

  /// report.txt body. Wall times are left out so reruns compare equal.
  std::string to_text() const;
  std::string timings_text() const;
};

struct RunResult {
  std::vector<Incident> incidents;
  RunReport report;
};

// Single stages. Each writes its artifact directory under `run_dir` (when
// non-empty) and returns what the next stage needs. Failures are rethrown as
// StageError tagged with the stage name.
IngestResult stage_ingest(const std::vector<std::filesystem::path>& inputs, const PipelineConfig& config,
                          const std::filesystem::path& run_dir);
TemplatingResult stage_templates(const std::vector<Alert>& alerts, const PipelineConfig& config,
                                 const std::filesystem::path& run_dir);
/// Applies an existing model instead of learning one.
std::vector<GeneralizedAlert> stage_merge(const std::vector<Alert>& alerts, const TemplateModel& model,
                                          const PipelineConfig& config, const std::filesystem::path& run_dir);
AlertGraph stage_graph(std::vector<GeneralizedAlert> generalized, const PipelineConfig& config,
                       const std::filesystem::path& run_dir);
PartitionReport stage_partition(const AlertGraph& graph, const PipelineConfig& config,
                                const std::filesystem::path& run_dir);
std::vector<Incident> stage_score(const AlertGraph& graph, const IncidentPartition& partition,
                                  const PipelineConfig& config, const std::filesystem::path& run_dir);

/// All stages in order plus report.txt and config.txt. Partial artifacts of
/// earlier stages stay on disk when a later stage fails.
RunResult run_pipeline(const PipelineConfig& config, const std::vector<std::filesystem::path>& inputs,
                       const std::filesystem::path& run_dir);

/// config.txt, transition_matrix.csv and the ingest tables saved by a run.
PipelineConfig load_run_config(const std::filesystem::path& run_dir);

// Readers for the artifacts, used when stages run as separate commands.
std::vector<Alert> load_alerts(const std::filesystem::path& run_dir);
std::vector<GeneralizedAlert> load_generalized(const std::filesystem::path& run_dir);
AlertGraph load_graph(const std::filesystem::path& run_dir);
IncidentPartition load_partition(const std::filesystem::path& run_dir, const AlertGraph& graph);
/// Incident documents of a run directory (or of a 05_incidents directory), in listing order.
std::vector<Incident> load_incidents(const std::filesystem::path& dir);
/// Rewrites the incident documents and index under `incident_dir`.
void write_incidents(const std::vector<Incident>& incidents, const std::filesystem::path& incident_dir);

}  // namespace distill

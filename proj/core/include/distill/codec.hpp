#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "distill/alert.hpp"
#include "distill/alert_graph.hpp"
#include "distill/incident.hpp"
#include "distill/partition.hpp"

namespace distill {

// One-line JSON records. Attributes are encoded as
// [{"name": .., "kind": "ip|port|text", "value": .., "level": n}] to keep
// schema order and hierarchy levels.
std::string alert_to_json(const Alert& alert);
Alert alert_from_json(std::string_view text);

std::string generalized_to_json(const GeneralizedAlert& alert);
GeneralizedAlert generalized_from_json(std::string_view text);

std::string alerts_to_jsonl(const std::vector<Alert>& alerts);
std::vector<Alert> alerts_from_jsonl(std::string_view text);
std::string generalized_to_jsonl(const std::vector<GeneralizedAlert>& alerts);
std::vector<GeneralizedAlert> generalized_from_jsonl(std::string_view text);

/// Full incident document: nodes (with source and destination IPs split out
/// for display), directed edges by node id, tactic scores, inference
/// metadata and current evidence.
std::string incident_to_json(const Incident& incident, int indent = 2);
Incident incident_from_json(std::string_view text);

/// Listing entry: id, tactic count, top score, node count.
std::string incident_index_json(const std::vector<Incident>& incidents, int indent = 2);

std::string scores_to_json(const TacticScores& scores, int indent = -1);

/// Columns as alert ids plus status, objective and per-column diagnostics.
std::string partition_to_text(const IncidentPartition& partition, const AlertGraph& graph);
IncidentPartition partition_from_text(std::string_view text, const AlertGraph& graph);

}  // namespace distill

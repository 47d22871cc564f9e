#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "distill/alert_graph.hpp"
#include "distill/factor_graph.hpp"
#include "distill/partition.hpp"

namespace distill {

enum class InferenceMode { Exact, SumProduct };

std::string_view inference_mode_name(InferenceMode m) noexcept;
std::optional<InferenceMode> parse_inference_mode(std::string_view text);

/// One partition column turned into a directed incident graph.
struct Incident {
  std::string id;
  std::vector<GeneralizedAlert> nodes;  // sorted by id
  std::vector<GraphEdge> edges;         // indices into nodes, sorted
  TacticSet tactics;
  std::set<IpAddress> assets;
  TacticScores scores;
  Evidence evidence;
  std::set<std::string> inactive_alerts;  // alert-level "Inactive": factor removed

  double top_score() const { return scores.max_score(); }
};

/// Non-empty columns become incidents (induced directed edges, tactic and
/// asset unions). Single-node columns without edges are dropped.
std::vector<Incident> extract_incidents(const AlertGraph& graph, const IncidentPartition& partition);

struct ScoringOptions {
  double false_indication = 0.2;
  InferenceMode inference = InferenceMode::Exact;
  SumProductOptions sum_product;
};

/// Factor graph of the incident with its current evidence applied.
TacticFactorGraph incident_factor_graph(const Incident& incident, const TransitionMatrix& transitions,
                                        double false_indication = 0.2);

/// Re-derives incident.scores from nodes, evidence and inactive alerts.
void score_incident(Incident& incident, const TransitionMatrix& transitions, const ScoringOptions& options = {});

/// score_incident over all incidents, `jobs` at a time.
void score_incidents(std::vector<Incident>& incidents, const TransitionMatrix& transitions,
                     const ScoringOptions& options = {}, unsigned jobs = 1);

/// All of `nodes` as one unscored incident; edges come from build_graph.
Incident make_incident(std::string id, std::vector<GeneralizedAlert> nodes, const TransitionMatrix& transitions,
                       double threshold = 0.4);

/// The three-alert evidence demo with alert scores fitted to the published
/// baseline, scored exactly. Id "demo".
Incident demo_incident(const TransitionMatrix& transitions = default_transition_matrix());

/// Orders by top score (desc), node count (desc), smallest node id, then
/// assigns ids "inc-001", ...
void order_incidents(std::vector<Incident>& incidents, bool assign_ids = true);

/// Ordering key shared with the service listing.
bool incident_before(const Incident& a, const Incident& b);

}  // namespace distill

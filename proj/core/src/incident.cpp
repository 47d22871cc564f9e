#include "distill/incident.hpp"

#include <algorithm>
#include <cstdio>

#include "distill/error.hpp"
#include "distill/parallel.hpp"

namespace distill {

std::string_view inference_mode_name(InferenceMode m) noexcept { return m == InferenceMode::Exact ? "exact" : "bp"; }

std::optional<InferenceMode> parse_inference_mode(std::string_view text) {
  if (text == "exact") return InferenceMode::Exact;
  if (text == "bp" || text == "sum-product") return InferenceMode::SumProduct;
  return std::nullopt;
}

std::vector<Incident> extract_incidents(const AlertGraph& graph, const IncidentPartition& partition) {
  std::vector<Incident> out;
  for (std::size_t c = 0; c < partition.columns.size(); ++c) {
    const auto& column = partition.columns[c];
    if (column.empty()) continue;
    std::vector<std::size_t> members(column.begin(), column.end());
    std::sort(members.begin(), members.end());  // graph nodes are id-sorted, so this keeps id order
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (auto i : members)
      if (i >= graph.size()) throw DataError("partition column references node " + std::to_string(i) + " outside the graph");
    const AlertGraph sub = graph.induced(members);
    if (sub.size() == 1 && sub.edges.empty()) continue;

    Incident inc;
    inc.id = "column-" + std::to_string(c);
    inc.nodes = sub.nodes;
    inc.edges = sub.edges;
    for (const auto& v : inc.nodes) {
      inc.tactics |= v.tactics;
      inc.assets.insert(v.assets.begin(), v.assets.end());
    }
    out.push_back(std::move(inc));
  }
  return out;
}

TacticFactorGraph incident_factor_graph(const Incident& incident, const TransitionMatrix& transitions,
                                        double false_indication) {
  TacticFactorGraph fg = build_fg(incident.nodes, transitions, false_indication);
  for (const auto& id : incident.inactive_alerts) fg = remove_alert_factor(std::move(fg), id);
  return apply_evidence(std::move(fg), incident.evidence);
}

void score_incident(Incident& incident, const TransitionMatrix& transitions, const ScoringOptions& options) {
  const auto fg = incident_factor_graph(incident, transitions, options.false_indication);
  incident.scores = options.inference == InferenceMode::Exact ? infer_exact(fg)
                                                              : infer_sum_product(fg, options.sum_product);
}

bool incident_before(const Incident& a, const Incident& b) {
  const double sa = a.top_score(), sb = b.top_score();
  if (sa != sb) return sa > sb;
  if (a.nodes.size() != b.nodes.size()) return a.nodes.size() > b.nodes.size();
  const std::string& ia = a.nodes.empty() ? a.id : a.nodes.front().id;
  const std::string& ib = b.nodes.empty() ? b.id : b.nodes.front().id;
  if (ia != ib) return ia < ib;
  return a.id < b.id;
}

void order_incidents(std::vector<Incident>& incidents, bool assign_ids) {
  std::stable_sort(incidents.begin(), incidents.end(), incident_before);
  if (!assign_ids) return;
  for (std::size_t i = 0; i < incidents.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "inc-%03zu", i + 1);
    incidents[i].id = buf;
  }
}

void score_incidents(std::vector<Incident>& incidents, const TransitionMatrix& transitions,
                     const ScoringOptions& options, unsigned jobs) {
  parallel_for(incidents.size(), jobs, [&](std::size_t i) { score_incident(incidents[i], transitions, options); });
}

Incident make_incident(std::string id, std::vector<GeneralizedAlert> nodes, const TransitionMatrix& transitions,
                       double threshold) {
  GraphOptions options;
  options.threshold = threshold;
  const AlertGraph graph = build_graph(std::move(nodes), transitions, options);
  IncidentPartition all;
  all.columns.emplace_back(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) all.columns[0][i] = i;
  auto incidents = extract_incidents(graph, all);
  if (incidents.empty()) throw DataError("incident '" + id + "' needs at least one edge or two nodes");
  incidents[0].id = std::move(id);
  return std::move(incidents[0]);
}

Incident demo_incident(const TransitionMatrix& transitions) {
  const Calibration fit = calibrate_appendix();
  Incident inc = make_incident("demo", evidence_demo_alerts(fit.p_ia, fit.p_ex, fit.p_lm), transitions);
  score_incident(inc, transitions);
  return inc;
}

}  // namespace distill

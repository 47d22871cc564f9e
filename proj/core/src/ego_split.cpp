#include "distill/ego_split.hpp"

#include <algorithm>
#include <map>

namespace distill {

std::vector<std::size_t> label_propagation(const Matrix& weights, const LabelPropagationOptions& options) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i;
  std::vector<double> self(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) self[i] = std::max(self[i], weights[i][j]);

  std::vector<std::size_t> next(n);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::map<std::size_t, double> score;
      score[label[i]] += self[i];
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && weights[i][j] > 0.0) score[label[j]] += weights[i][j];
      std::size_t best = label[i];
      double best_score = -1.0;
      // std::map iterates labels in ascending order, so ties keep the smallest.
      for (const auto& [l, s] : score)
        if (s > best_score + 1e-12) {
          best = l;
          best_score = s;
        }
      next[i] = best;
      changed |= best != label[i];
    }
    label.swap(next);
    if (!changed) break;
  }

  std::map<std::size_t, std::size_t> dense;
  for (auto& l : label) {
    auto [it, inserted] = dense.try_emplace(l, dense.size());
    l = it->second;
  }
  return label;
}

IncidentPartition partition_communities(const AlertGraph& graph, int max_memb,
                                        const LabelPropagationOptions& options) {
  const std::size_t n = graph.size();
  const Matrix w = graph.symmetric_weights();
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && w[i][j] > 0.0) neighbors[i].push_back(j);

  // Personas: persona_of[u][v] is the persona of u that faces neighbor v.
  std::vector<std::map<std::size_t, std::size_t>> persona_of(n);
  std::vector<std::size_t> owner;
  for (std::size_t u = 0; u < n; ++u) {
    const auto& ego = neighbors[u];
    if (ego.empty()) continue;
    Matrix local(ego.size(), std::vector<double>(ego.size(), 0.0));
    for (std::size_t a = 0; a < ego.size(); ++a)
      for (std::size_t b = 0; b < ego.size(); ++b) local[a][b] = a == b ? 0.0 : w[ego[a]][ego[b]];
    const auto clusters = label_propagation(local, options);
    const std::size_t base = owner.size();
    const std::size_t count = *std::max_element(clusters.begin(), clusters.end()) + 1;
    for (std::size_t c = 0; c < count; ++c) owner.push_back(u);
    for (std::size_t a = 0; a < ego.size(); ++a) persona_of[u][ego[a]] = base + clusters[a];
  }

  Matrix persona_graph(owner.size(), std::vector<double>(owner.size(), 0.0));
  for (std::size_t u = 0; u < n; ++u)
    for (auto v : neighbors[u]) {
      const auto pu = persona_of[u].at(v);
      const auto pv = persona_of[v].at(u);
      persona_graph[pu][pv] = std::max(persona_graph[pu][pv], w[u][v]);
      persona_graph[pv][pu] = persona_graph[pu][pv];
    }
  const auto persona_label = label_propagation(persona_graph, options);

  std::map<std::size_t, std::vector<std::size_t>> by_label;
  for (std::size_t p = 0; p < owner.size(); ++p) by_label[persona_label[p]].push_back(owner[p]);
  std::vector<std::vector<std::size_t>> communities;
  for (auto& [l, members] : by_label) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    communities.push_back(std::move(members));
  }
  for (std::size_t u = 0; u < n; ++u)
    if (neighbors[u].empty()) communities.push_back({u});

  // Enforce the membership cap, preferring larger communities.
  std::vector<std::size_t> order(communities.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return communities[a].size() > communities[b].size(); });
  std::vector<int> memberships(n, 0);
  std::vector<std::vector<std::size_t>> kept(communities.size());
  for (auto c : order)
    for (auto u : communities[c])
      if (memberships[u] < max_memb) {
        ++memberships[u];
        kept[c].push_back(u);
      }
  std::vector<std::vector<std::size_t>> columns;
  for (auto& c : kept)
    if (!c.empty()) columns.push_back(std::move(c));
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());

  IncidentPartition out;
  out.columns = std::move(columns);
  out.status = PartitionStatus::Heuristic;
  describe(out, graph);
  return out;
}

}  // namespace distill

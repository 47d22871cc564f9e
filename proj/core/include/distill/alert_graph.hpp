#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "distill/alert.hpp"
#include "distill/transition_matrix.hpp"

namespace distill {

using IpCorrelation = std::function<int(const IpAddress&, const IpAddress&)>;

/// Max tactic transition from `v` to `w`, times the best asset match. An
/// empty `ip_corr` means the Kronecker delta (ip_correlation).
double correlation(const GeneralizedAlert& v, const GeneralizedAlert& w, const TransitionMatrix& transitions,
                   const IpCorrelation& ip_corr = {});

struct GraphEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 0.0;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

using Matrix = std::vector<std::vector<double>>;

/// Directed weighted graph over generalized alerts. Nodes are sorted by id,
/// edges by (from, to).
struct AlertGraph {
  std::vector<GeneralizedAlert> nodes;
  std::vector<GraphEdge> edges;
  double threshold = 0.4;

  std::size_t size() const noexcept { return nodes.size(); }
  std::optional<std::size_t> index_of(std::string_view id) const;

  /// W with w_ij = max(w(i->j), w(j->i)).
  Matrix symmetric_weights() const;
  /// L = D - W over symmetric_weights().
  Matrix laplacian() const;
  std::vector<std::size_t> degrees() const;

  /// Subgraph induced by `members` (node indices), re-indexed in the given order.
  AlertGraph induced(std::span<const std::size_t> members) const;
  /// Connected components of the undirected view, each sorted, ordered by first node.
  std::vector<std::vector<std::size_t>> components() const;
};

struct GraphOptions {
  double threshold = 0.4;
  /// Caps the start-time gap of an edge; unset means unbounded.
  std::optional<std::chrono::microseconds> time_window;
  IpCorrelation ip_corr;  // empty: ip_correlation
  unsigned jobs = 1;
};

/// Edge v->w for every pair with start(v) <= start(w) whose correlation is
/// strictly above the threshold. With equal starts both directions are
/// evaluated; if both pass with equal weight only the lower id keeps its edge.
AlertGraph build_graph(std::vector<GeneralizedAlert> alerts, const TransitionMatrix& transitions,
                       const GraphOptions& options = {});

/// Tab separated node and edge tables.
std::string graph_to_tsv(const AlertGraph& graph);
/// Rebuilds the edge list from graph_to_tsv output; `nodes` supplies the
/// alert records (matched by id).
AlertGraph graph_from_tsv(std::string_view text, std::vector<GeneralizedAlert> nodes);
/// Graphviz DOT, labels follow the source ip / destination ip / signature layout.
std::string graph_to_dot(const AlertGraph& graph);

}  // namespace distill

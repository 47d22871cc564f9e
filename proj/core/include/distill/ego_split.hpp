#pragma once

#include <cstddef>
#include <vector>

#include "distill/alert_graph.hpp"
#include "distill/partition.hpp"

namespace distill {

struct LabelPropagationOptions {
  std::size_t max_iterations = 100;
};

/// Synchronous weighted label propagation on a symmetric weight matrix.
/// Each node adopts the label with the largest incident weight; its own label
/// counts with the node's strongest edge weight. Ties go to the label first
/// seen in node order. Returns one label (0-based, dense) per node.
std::vector<std::size_t> label_propagation(const Matrix& weights, const LabelPropagationOptions& options = {});

/// Overlapping communities by ego-splitting: each node's ego-net (without the
/// node) is clustered, one persona per local cluster, the persona graph is
/// clustered, and personas map back to their nodes. Nodes without edges become
/// singleton communities. Communities are sorted; memberships above
/// `max_memb` keep the largest communities.
IncidentPartition partition_communities(const AlertGraph& graph, int max_memb,
                                        const LabelPropagationOptions& options = {});

}  // namespace distill

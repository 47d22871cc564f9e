#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "distill/alert_graph.hpp"
#include "distill/lp.hpp"
#include "distill/milp.hpp"

namespace distill {

enum class TacticPenalty { Infinity, One };

std::string_view tactic_penalty_name(TacticPenalty p) noexcept;
std::optional<TacticPenalty> parse_tactic_penalty(std::string_view text);

struct PartitionOptions {
  std::size_t k = 0;  // 0: ceil(|V| / max_card)
  int max_memb = 2;
  int max_card = 20;
  double gamma0 = 1.0;  // cut and cardinality slack
  double gamma1 = 0.5;  // missing tactics
  double gamma2 = 0.5;  // asset count
  TacticPenalty tactic_penalty = TacticPenalty::Infinity;
  /// Require every node with at least one edge to sit in some column.
  bool cover = false;
};

/// x[i][k] == 1 when node i belongs to column k.
using Assignment = std::vector<std::vector<std::uint8_t>>;

/// The partitioning MILP for one graph, with its variable layout.
class PartitionProblem {
 public:
  std::size_t nodes() const noexcept { return weights.size(); }
  std::size_t columns() const noexcept { return k; }

  Matrix weights;
  Matrix laplacian;
  std::size_t k = 1;
  int max_memb = 2;
  int max_card = 20;
  double gamma0 = 1.0, gamma1 = 0.5, gamma2 = 0.5;
  TacticPenalty tactic_penalty = TacticPenalty::Infinity;
  bool cover = false;
  double c = 0.0;  // 2 * max row sum of weights
  std::vector<TacticSet> node_tactics;
  std::vector<IpAddress> assets;                     // sorted union
  std::vector<std::vector<std::size_t>> node_assets;  // indices into assets
  std::vector<std::size_t> degree;

  LinearProgram lp;

  // Variable indices in `lp`.
  std::size_t x(std::size_t i, std::size_t col) const { return x_base_ + i * k + col; }
  std::size_t s(std::size_t i, std::size_t col) const { return s_base_ + i * k + col; }
  std::size_t t(std::size_t i, std::size_t col) const { return t_base_ + i * k + col; }
  std::size_t alpha(std::size_t col) const { return alpha_base_ + col; }
  std::size_t missing(std::size_t tactic, std::size_t col) const { return miss_base_ + tactic * k + col; }
  std::size_t present(std::size_t asset, std::size_t col) const { return l_base_ + asset * k + col; }
  std::size_t beta(std::size_t asset, std::size_t col) const { return beta_base_ + asset * k + col; }

  /// Copy of the LP with every x fixed to `assignment`.
  LinearProgram with_fixed_assignment(const Assignment& assignment) const;

 private:
  friend PartitionProblem build_problem(const AlertGraph&, const PartitionOptions&);
  std::size_t x_base_ = 0, s_base_ = 0, t_base_ = 0, alpha_base_ = 0, miss_base_ = 0, l_base_ = 0, beta_base_ = 0;
};

/// Throws DataError on an empty graph, ConfigError on invalid options.
PartitionProblem build_problem(const AlertGraph& graph, const PartitionOptions& options);

enum class PartitionStatus { Optimal, RelaxedRounded, Heuristic };
std::string_view partition_status_name(PartitionStatus s) noexcept;

struct ColumnDiagnostics {
  std::size_t size = 0;
  double cut = 0.0;
  TacticSet missing;
  std::size_t assets = 0;
};

struct IncidentPartition {
  std::vector<std::vector<std::size_t>> columns;  // sorted node indices, may be empty
  double objective = 0.0;
  double lower_bound = 0.0;  // LP bound for relaxed/exact solves
  PartitionStatus status = PartitionStatus::Heuristic;
  std::vector<ColumnDiagnostics> diagnostics;
  std::size_t nodes_explored = 0;
};

/// sum_k x_k^T L x_k + C * |x_k|: the slack term minimized with X fixed.
double min_slack_objective(const Assignment& x, const PartitionProblem& p);

struct TacticAssetTerms {
  std::vector<double> alpha;         // per column, according to the penalty mode
  std::vector<double> asset_counts;  // per column
  std::vector<TacticSet> missing;    // per column
};
TacticAssetTerms tactic_asset_terms(const Assignment& x, const PartitionProblem& p);

/// gamma0 * slack + gamma1 * sum(alpha) + gamma2 * sum(assets), in closed form.
double partition_objective(const Assignment& x, const PartitionProblem& p);

/// Membership, cardinality and (if enabled) cover constraints.
bool is_feasible(const Assignment& x, const PartitionProblem& p);

Assignment to_assignment(const std::vector<std::vector<std::size_t>>& columns, std::size_t nodes);
std::vector<std::vector<std::size_t>> to_columns(const Assignment& x);

/// Branch and bound to proven optimality. Refuses (SolverLimitError) above
/// options.max_integers binaries or when the node limit is hit.
IncidentPartition solve_exact(const PartitionProblem& p, const MilpOptions& options = {});

/// LP relaxation, rounding at 0.5 and deterministic repair. lower_bound holds
/// the LP value; objective is re-evaluated on the rounded assignment.
IncidentPartition solve_relaxed(const PartitionProblem& p, const SimplexOptions& options = {});

/// Fills the per-column diagnostics from the problem data.
void describe(IncidentPartition& partition, const PartitionProblem& p);
/// Same diagnostics computed straight from the graph (no LP is built).
void describe(IncidentPartition& partition, const AlertGraph& graph);

enum class PartitionMode { Exact, Relaxed, Community, Auto };
std::string_view partition_mode_name(PartitionMode m) noexcept;
std::optional<PartitionMode> parse_partition_mode(std::string_view text);

struct PartitionReport {
  IncidentPartition partition;  // node indices refer to the whole graph
  std::size_t components = 0;
  std::size_t exact_components = 0;
  std::size_t relaxed_components = 0;
};

/// Whole-graph solve for Exact/Relaxed/Community. Auto splits the graph into
/// connected components (isolated nodes dropped), sizes K per component, and
/// solves each exactly when it needs at most two columns, fits max_integers and
/// finishes within a small node budget, otherwise through the relaxation.
PartitionReport partition_graph(const AlertGraph& graph, PartitionMode mode, const PartitionOptions& options,
                                const MilpOptions& milp = {}, unsigned jobs = 1);

}  // namespace distill

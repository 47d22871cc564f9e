#pragma once

#include <cstddef>
#include <vector>

#include "distill/lp.hpp"

namespace distill {

struct MilpOptions {
  /// Refuse problems with more integer variables than this.
  std::size_t max_integers = 60;
  std::size_t node_limit = 100000;
  /// Nodes whose bound is within this (relative) distance of the incumbent are pruned.
  double gap_tolerance = 1e-9;
  double integrality_tolerance = 1e-6;
  /// Optional known-feasible objective used for early pruning.
  double cutoff = kInfinity;
  const LpSolver* lp_solver = nullptr;  // default: SimplexSolver
};

enum class MilpStatus { Optimal, NodeLimit, Infeasible };

struct MilpResult {
  MilpStatus status = MilpStatus::Infeasible;
  double objective = kInfinity;  // incumbent
  double bound = -kInfinity;     // best open bound (== objective when optimal)
  std::vector<double> x;
  std::size_t nodes = 0;
};

/// Best-bound branch and bound over the LP relaxation, branching on the most
/// fractional integer variable. Throws SolverLimitError above max_integers.
MilpResult solve_milp(const LinearProgram& lp, const MilpOptions& options = {});

}  // namespace distill

#include "distill/milp.hpp"

#include <cmath>
#include <queue>

#include "distill/error.hpp"

namespace distill {

namespace {

struct Node {
  double bound;
  std::size_t seq;
  std::vector<std::pair<double, double>> bounds;  // per variable
  std::vector<double> x;

  // std::priority_queue pops the largest; invert for best (lowest) bound first.
  bool operator<(const Node& other) const {
    if (bound != other.bound) return bound > other.bound;
    return seq > other.seq;
  }
};

}  // namespace

MilpResult solve_milp(const LinearProgram& lp, const MilpOptions& options) {
  const std::size_t integers = lp.integer_count();
  if (integers > options.max_integers)
    throw SolverLimitError("branch and bound refused: " + std::to_string(integers) + " integer variables exceed the " +
                           std::to_string(options.max_integers) + " limit; use the LP relaxation instead (--mode relaxed)");

  const SimplexSolver fallback;
  const LpSolver& solver = options.lp_solver ? *options.lp_solver : fallback;
  LinearProgram work = lp;

  MilpResult result;
  result.objective = options.cutoff;
  std::size_t seq = 0;
  std::priority_queue<Node> open;

  auto evaluate = [&](std::vector<std::pair<double, double>> bounds) {
    for (std::size_t j = 0; j < work.variables.size(); ++j) {
      work.variables[j].lower = bounds[j].first;
      work.variables[j].upper = bounds[j].second;
    }
    ++result.nodes;
    LpResult r = solver.solve(work);
    if (r.status == LpStatus::Unbounded) throw InternalError("branch and bound: LP relaxation is unbounded");
    if (r.status != LpStatus::Optimal) return;
    const double cut = result.objective - options.gap_tolerance * std::max(1.0, std::abs(result.objective));
    if (r.objective >= cut) return;
    open.push(Node{r.objective, seq++, std::move(bounds), std::move(r.x)});
  };

  std::vector<std::pair<double, double>> root;
  for (const auto& v : lp.variables) root.push_back({v.lower, v.upper});
  evaluate(root);

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    const double cut = result.objective - options.gap_tolerance * std::max(1.0, std::abs(result.objective));
    if (node.bound >= cut) continue;

    std::size_t branch = lp.variables.size();
    double best_frac = options.integrality_tolerance;
    for (std::size_t j = 0; j < lp.variables.size(); ++j) {
      if (!lp.variables[j].integer) continue;
      const double f = node.x[j] - std::floor(node.x[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist > best_frac + 1e-12) {
        best_frac = dist;
        branch = j;
      }
    }
    if (branch == lp.variables.size()) {
      for (std::size_t j = 0; j < lp.variables.size(); ++j)
        if (lp.variables[j].integer) node.x[j] = std::round(node.x[j]);
      result.objective = node.bound;
      result.x = std::move(node.x);
      continue;
    }
    if (result.nodes >= options.node_limit) {
      open.push(std::move(node));
      break;
    }
    const double v = node.x[branch];
    auto down = node.bounds;
    down[branch].second = std::floor(v);
    auto up = std::move(node.bounds);
    up[branch].first = std::ceil(v);
    evaluate(std::move(down));
    evaluate(std::move(up));
  }

  if (!open.empty()) {
    result.status = MilpStatus::NodeLimit;
    result.bound = open.top().bound;
  } else if (!result.x.empty()) {
    result.status = MilpStatus::Optimal;
    result.bound = result.objective;
  } else {
    result.status = MilpStatus::Infeasible;
  }
  return result;
}

}  // namespace distill

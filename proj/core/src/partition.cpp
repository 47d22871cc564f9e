#include "distill/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "distill/ego_split.hpp"
#include "distill/error.hpp"
#include "distill/parallel.hpp"

namespace distill {

std::string_view tactic_penalty_name(TacticPenalty p) noexcept { return p == TacticPenalty::One ? "one" : "inf"; }

std::optional<TacticPenalty> parse_tactic_penalty(std::string_view text) {
  if (text == "inf" || text == "infinity" || text == "inf_norm") return TacticPenalty::Infinity;
  if (text == "one" || text == "one_norm" || text == "1") return TacticPenalty::One;
  return std::nullopt;
}

std::string_view partition_status_name(PartitionStatus s) noexcept {
  switch (s) {
    case PartitionStatus::Optimal: return "optimal";
    case PartitionStatus::RelaxedRounded: return "relaxed-rounded";
    case PartitionStatus::Heuristic: return "heuristic";
  }
  return "heuristic";
}

std::string_view partition_mode_name(PartitionMode m) noexcept {
  switch (m) {
    case PartitionMode::Exact: return "exact";
    case PartitionMode::Relaxed: return "relaxed";
    case PartitionMode::Community: return "community";
    case PartitionMode::Auto: return "auto";
  }
  return "auto";
}

std::optional<PartitionMode> parse_partition_mode(std::string_view text) {
  if (text == "exact") return PartitionMode::Exact;
  if (text == "relaxed") return PartitionMode::Relaxed;
  if (text == "community") return PartitionMode::Community;
  if (text == "auto") return PartitionMode::Auto;
  return std::nullopt;
}

PartitionProblem build_problem(const AlertGraph& graph, const PartitionOptions& options) {
  const std::size_t n = graph.size();
  if (n == 0) throw DataError("partitioning: empty graph, nothing to partition");
  if (options.max_card < 1) throw ConfigError("max_card must be at least 1");
  if (options.max_memb < 1) throw ConfigError("max_memb must be at least 1");
  if (options.gamma0 < 0 || options.gamma1 < 0 || options.gamma2 < 0)
    throw ConfigError("gamma weights must be non-negative");

  PartitionProblem p;
  p.weights = graph.symmetric_weights();
  p.laplacian = graph.laplacian();
  p.k = options.k != 0 ? options.k : (n + options.max_card - 1) / options.max_card;
  p.max_memb = options.max_memb;
  p.max_card = options.max_card;
  p.gamma0 = options.gamma0;
  p.gamma1 = options.gamma1;
  p.gamma2 = options.gamma2;
  p.tactic_penalty = options.tactic_penalty;
  p.cover = options.cover;

  double max_row = 0.0;
  p.degree.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row += p.weights[i][j];
      if (p.weights[i][j] > 0.0) ++p.degree[i];
    }
    max_row = std::max(max_row, row);
  }
  p.c = 2.0 * max_row;

  std::set<IpAddress> all_assets;
  for (const auto& v : graph.nodes) {
    p.node_tactics.push_back(v.tactics);
    all_assets.insert(v.assets.begin(), v.assets.end());
  }
  p.assets.assign(all_assets.begin(), all_assets.end());
  for (const auto& v : graph.nodes) {
    std::vector<std::size_t> idx;
    for (const auto& a : v.assets)
      idx.push_back(static_cast<std::size_t>(std::lower_bound(p.assets.begin(), p.assets.end(), a) - p.assets.begin()));
    p.node_assets.push_back(std::move(idx));
  }

  if (p.cover) {
    const auto covered = static_cast<std::size_t>(std::count_if(p.degree.begin(), p.degree.end(), [](auto d) { return d > 0; }));
    if (covered > p.k * static_cast<std::size_t>(p.max_card))
      throw ConfigError("cover constraint infeasible: " + std::to_string(covered) + " connected nodes exceed K*MaxCard = " +
                        std::to_string(p.k * p.max_card));
  }

  const std::size_t k = p.k;
  LinearProgram& lp = p.lp;
  auto name = [](const char* base, std::size_t a, std::size_t b) {
    return std::string(base) + "_" + std::to_string(a) + "_" + std::to_string(b);
  };

  p.x_base_ = lp.variables.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) lp.add_variable(name("x", i, c), 0.0, 1.0, 0.0, true);
  p.s_base_ = lp.variables.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) lp.add_variable(name("s", i, c), 0.0, kInfinity, p.gamma0);
  p.t_base_ = lp.variables.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) lp.add_variable(name("t", i, c), 0.0, kInfinity, 0.0);
  const bool inf_norm = p.tactic_penalty == TacticPenalty::Infinity;
  p.alpha_base_ = lp.variables.size();
  for (std::size_t c = 0; c < k; ++c)
    lp.add_variable("alpha_" + std::to_string(c), 0.0, kInfinity, inf_norm ? p.gamma1 : 0.0);
  p.miss_base_ = lp.variables.size();
  for (std::size_t tac = 0; tac < kTacticCount; ++tac)
    for (std::size_t c = 0; c < k; ++c) lp.add_variable(name("m", tac, c), 0.0, kInfinity, inf_norm ? 0.0 : p.gamma1);
  p.l_base_ = lp.variables.size();
  for (std::size_t a = 0; a < p.assets.size(); ++a)
    for (std::size_t c = 0; c < k; ++c) lp.add_variable(name("l", a, c), 0.0, kInfinity, 0.0);
  p.beta_base_ = lp.variables.size();
  for (std::size_t a = 0; a < p.assets.size(); ++a)
    for (std::size_t c = 0; c < k; ++c) lp.add_variable(name("beta", a, c), 0.0, kInfinity, p.gamma2);

  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      // L x_k - t_k - s_k + C e = 0
      std::vector<std::pair<std::size_t, double>> terms;
      for (std::size_t j = 0; j < n; ++j)
        if (p.laplacian[i][j] != 0.0) terms.push_back({p.x(j, c), p.laplacian[i][j]});
      terms.push_back({p.t(i, c), -1.0});
      terms.push_back({p.s(i, c), -1.0});
      lp.add_row(name("slack", i, c), std::move(terms), RowSense::Equal, -p.c);
      // t_k <= 2C (e - x_k)
      lp.add_row(name("tcap", i, c), {{p.t(i, c), 1.0}, {p.x(i, c), 2.0 * p.c}}, RowSense::LessEqual, 2.0 * p.c);
    }
    for (std::size_t tac = 0; tac < kTacticCount; ++tac) {
      // m_{tac,k} >= 1 - sum of x over alerts carrying the tactic
      std::vector<std::pair<std::size_t, double>> terms{{p.missing(tac, c), 1.0}};
      for (std::size_t i = 0; i < n; ++i)
        if (p.node_tactics[i].contains(tactic_at(tac))) terms.push_back({p.x(i, c), 1.0});
      lp.add_row(name("miss", tac, c), std::move(terms), RowSense::GreaterEqual, 1.0);
      if (inf_norm)
        lp.add_row(name("alpha", tac, c), {{p.alpha(c), 1.0}, {p.missing(tac, c), -1.0}}, RowSense::GreaterEqual, 0.0);
    }
    for (std::size_t a = 0; a < p.assets.size(); ++a) {
      for (std::size_t i = 0; i < n; ++i) {
        if (std::find(p.node_assets[i].begin(), p.node_assets[i].end(), a) == p.node_assets[i].end()) continue;
        lp.add_row(name("asset", a, c) + "_" + std::to_string(i), {{p.present(a, c), 1.0}, {p.x(i, c), -1.0}},
                   RowSense::GreaterEqual, 0.0);
      }
      lp.add_row(name("beta", a, c), {{p.beta(a, c), 1.0}, {p.present(a, c), -1.0}}, RowSense::GreaterEqual, 0.0);
    }
    // Set P: column cardinality
    std::vector<std::pair<std::size_t, double>> card;
    for (std::size_t i = 0; i < n; ++i) card.push_back({p.x(i, c), 1.0});
    lp.add_row("card_" + std::to_string(c), std::move(card), RowSense::LessEqual, p.max_card);
  }
  for (std::size_t i = 0; i < n; ++i) {
    // Set R: node membership
    std::vector<std::pair<std::size_t, double>> memb;
    for (std::size_t c = 0; c < k; ++c) memb.push_back({p.x(i, c), 1.0});
    lp.add_row("memb_" + std::to_string(i), memb, RowSense::LessEqual, p.max_memb);
    if (p.cover && p.degree[i] > 0) lp.add_row("cover_" + std::to_string(i), memb, RowSense::GreaterEqual, 1.0);
  }
  return p;
}

LinearProgram PartitionProblem::with_fixed_assignment(const Assignment& assignment) const {
  LinearProgram fixed = lp;
  for (std::size_t i = 0; i < nodes(); ++i)
    for (std::size_t c = 0; c < k; ++c) {
      auto& v = fixed.variables[x(i, c)];
      v.lower = v.upper = assignment[i][c] ? 1.0 : 0.0;
      v.integer = false;
    }
  return fixed;
}

Assignment to_assignment(const std::vector<std::vector<std::size_t>>& columns, std::size_t nodes) {
  Assignment x(nodes, std::vector<std::uint8_t>(columns.size(), 0));
  for (std::size_t c = 0; c < columns.size(); ++c)
    for (auto i : columns[c]) x.at(i).at(c) = 1;
  return x;
}

std::vector<std::vector<std::size_t>> to_columns(const Assignment& x) {
  const std::size_t k = x.empty() ? 0 : x.front().size();
  std::vector<std::vector<std::size_t>> columns(k);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t c = 0; c < k; ++c)
      if (x[i][c]) columns[c].push_back(i);
  return columns;
}

double min_slack_objective(const Assignment& x, const PartitionProblem& p) {
  double total = 0.0;
  for (std::size_t c = 0; c < p.k; ++c) {
    double quad = 0.0;
    double card = 0.0;
    for (std::size_t i = 0; i < p.nodes(); ++i) {
      if (!x[i][c]) continue;
      card += 1.0;
      for (std::size_t j = 0; j < p.nodes(); ++j)
        if (x[j][c]) quad += p.laplacian[i][j];
    }
    total += quad + p.c * card;
  }
  return total;
}

TacticAssetTerms tactic_asset_terms(const Assignment& x, const PartitionProblem& p) {
  TacticAssetTerms terms;
  for (std::size_t c = 0; c < p.k; ++c) {
    TacticSet covered;
    std::set<std::size_t> assets;
    for (std::size_t i = 0; i < p.nodes(); ++i) {
      if (!x[i][c]) continue;
      covered |= p.node_tactics[i];
      assets.insert(p.node_assets[i].begin(), p.node_assets[i].end());
    }
    TacticSet missing;
    for (auto t : all_tactics())
      if (!covered.contains(t)) missing.insert(t);
    const double alpha = p.tactic_penalty == TacticPenalty::Infinity ? (missing.empty() ? 0.0 : 1.0)
                                                                      : static_cast<double>(missing.size());
    terms.alpha.push_back(alpha);
    terms.asset_counts.push_back(static_cast<double>(assets.size()));
    terms.missing.push_back(missing);
  }
  return terms;
}

double partition_objective(const Assignment& x, const PartitionProblem& p) {
  const auto terms = tactic_asset_terms(x, p);
  const double alpha = std::accumulate(terms.alpha.begin(), terms.alpha.end(), 0.0);
  const double assets = std::accumulate(terms.asset_counts.begin(), terms.asset_counts.end(), 0.0);
  return p.gamma0 * min_slack_objective(x, p) + p.gamma1 * alpha + p.gamma2 * assets;
}

bool is_feasible(const Assignment& x, const PartitionProblem& p) {
  if (x.size() != p.nodes()) return false;
  std::vector<int> card(p.k, 0);
  for (std::size_t i = 0; i < p.nodes(); ++i) {
    if (x[i].size() != p.k) return false;
    int memb = 0;
    for (std::size_t c = 0; c < p.k; ++c)
      if (x[i][c]) {
        ++memb;
        ++card[c];
      }
    if (memb > p.max_memb) return false;
    if (p.cover && p.degree[i] > 0 && memb == 0) return false;
  }
  return std::all_of(card.begin(), card.end(), [&](int c) { return c <= p.max_card; });
}

void describe(IncidentPartition& partition, const PartitionProblem& p) {
  const Assignment x = to_assignment(partition.columns, p.nodes());
  const auto terms = tactic_asset_terms(x, p);
  partition.diagnostics.clear();
  for (std::size_t c = 0; c < partition.columns.size(); ++c) {
    ColumnDiagnostics d;
    d.size = partition.columns[c].size();
    for (auto i : partition.columns[c])
      for (std::size_t j = 0; j < p.nodes(); ++j)
        if (!x[j][c]) d.cut += p.weights[i][j];
    if (c < terms.missing.size()) {
      d.missing = terms.missing[c];
      d.assets = static_cast<std::size_t>(terms.asset_counts[c]);
    }
    partition.diagnostics.push_back(d);
  }
}

void describe(IncidentPartition& partition, const AlertGraph& graph) {
  const Matrix w = graph.symmetric_weights();
  partition.diagnostics.clear();
  for (const auto& column : partition.columns) {
    ColumnDiagnostics d;
    d.size = column.size();
    std::vector<char> inside(graph.size(), 0);
    for (auto i : column) inside[i] = 1;
    TacticSet covered;
    std::set<IpAddress> assets;
    for (auto i : column) {
      for (std::size_t j = 0; j < graph.size(); ++j)
        if (!inside[j]) d.cut += w[i][j];
      covered |= graph.nodes[i].tactics;
      assets.insert(graph.nodes[i].assets.begin(), graph.nodes[i].assets.end());
    }
    for (auto t : all_tactics())
      if (!covered.contains(t)) d.missing.insert(t);
    d.assets = assets.size();
    partition.diagnostics.push_back(d);
  }
}

namespace {

Assignment assignment_from(const std::vector<double>& values, const PartitionProblem& p, double threshold) {
  Assignment x(p.nodes(), std::vector<std::uint8_t>(p.k, 0));
  for (std::size_t i = 0; i < p.nodes(); ++i)
    for (std::size_t c = 0; c < p.k; ++c) x[i][c] = values[p.x(i, c)] >= threshold ? 1 : 0;
  return x;
}

IncidentPartition finish(const Assignment& x, const PartitionProblem& p, PartitionStatus status, double bound) {
  IncidentPartition out;
  out.columns = to_columns(x);
  out.columns.resize(p.k);
  out.objective = partition_objective(x, p);
  out.lower_bound = bound;
  out.status = status;
  describe(out, p);
  return out;
}

}  // namespace

IncidentPartition solve_exact(const PartitionProblem& p, const MilpOptions& options) {
  const MilpResult r = solve_milp(p.lp, options);
  if (r.status == MilpStatus::NodeLimit)
    throw SolverLimitError("branch and bound stopped at the node limit (" + std::to_string(options.node_limit) +
                           "); use the LP relaxation instead (--mode relaxed)");
  if (r.status == MilpStatus::Infeasible) {
    if (std::isfinite(options.cutoff)) throw SolverLimitError("no solution below the cutoff");
    throw InternalError("partitioning MILP reported infeasible");
  }
  IncidentPartition out = finish(assignment_from(r.x, p, 0.5), p, PartitionStatus::Optimal, r.bound);
  out.nodes_explored = r.nodes;
  return out;
}

IncidentPartition solve_relaxed(const PartitionProblem& p, const SimplexOptions& options) {
  const SimplexSolver solver(options);
  const LpResult r = solver.solve(p.lp);
  if (r.status != LpStatus::Optimal) throw InternalError("partitioning LP relaxation is not optimal");
  const auto value = [&](std::size_t i, std::size_t c) { return r.x[p.x(i, c)]; };
  const std::size_t n = p.nodes();

  Assignment x = assignment_from(r.x, p, 0.5 - 1e-9);

  // MaxMemb: keep the strongest memberships (value desc, column asc).
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> in;
    for (std::size_t c = 0; c < p.k; ++c)
      if (x[i][c]) in.push_back(c);
    if (in.size() <= static_cast<std::size_t>(p.max_memb)) continue;
    std::stable_sort(in.begin(), in.end(), [&](auto a, auto b) { return value(i, a) > value(i, b); });
    for (std::size_t q = static_cast<std::size_t>(p.max_memb); q < in.size(); ++q) x[i][in[q]] = 0;
  }
  // MaxCard: drop the weakest-connected members (internal degree, then value, then id).
  for (std::size_t c = 0; c < p.k; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (x[i][c]) members.push_back(i);
    if (members.size() <= static_cast<std::size_t>(p.max_card)) continue;
    std::vector<double> internal(n, 0.0);
    for (auto i : members)
      for (auto j : members) internal[i] += p.weights[i][j];
    std::stable_sort(members.begin(), members.end(), [&](auto a, auto b) {
      if (internal[a] != internal[b]) return internal[a] > internal[b];
      return value(a, c) > value(b, c);
    });
    for (std::size_t q = static_cast<std::size_t>(p.max_card); q < members.size(); ++q) x[members[q]][c] = 0;
  }
  // Cover: place uncovered connected nodes into the best column with room.
  if (p.cover) {
    std::vector<int> card(p.k, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < p.k; ++c) card[c] += x[i][c];
    for (std::size_t i = 0; i < n; ++i) {
      if (p.degree[i] == 0) continue;
      if (std::any_of(x[i].begin(), x[i].end(), [](auto v) { return v != 0; })) continue;
      std::size_t best = p.k;
      double best_value = -1.0, best_link = -1.0;
      for (std::size_t c = 0; c < p.k; ++c) {
        if (card[c] >= p.max_card) continue;
        double link = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (x[j][c]) link += p.weights[i][j];
        if (value(i, c) > best_value + 1e-12 || (std::abs(value(i, c) - best_value) <= 1e-12 && link > best_link)) {
          best = c;
          best_value = value(i, c);
          best_link = link;
        }
      }
      if (best == p.k) {
        // Every column is full. Free a seat held by an isolated node or by a
        // node that stays covered elsewhere; the cover check in build_problem
        // guarantees one exists.
        for (std::size_t c = 0; c < p.k && best == p.k; ++c) {
          for (std::size_t j = 0; j < n; ++j) {
            if (!x[j][c]) continue;
            const int memb = std::accumulate(x[j].begin(), x[j].end(), 0);
            if (p.degree[j] == 0 || memb >= 2) {
              x[j][c] = 0;
              --card[c];
              best = c;
              break;
            }
          }
        }
        if (best == p.k) throw InternalError("rounding repair: no column has room for node " + std::to_string(i));
      }
      x[i][best] = 1;
      ++card[best];
    }
  }
  return finish(x, p, PartitionStatus::RelaxedRounded, r.objective);
}

// Auto tries branch and bound only where it tends to finish: column symmetry
// makes the search explode beyond two columns.
constexpr std::size_t kAutoNodeBudget = 250;
constexpr std::size_t kAutoExactColumns = 2;

PartitionReport partition_graph(const AlertGraph& graph, PartitionMode mode, const PartitionOptions& options,
                                const MilpOptions& milp, unsigned jobs) {
  PartitionReport report;
  if (graph.size() == 0) {
    report.partition.status = mode == PartitionMode::Exact ? PartitionStatus::Optimal
                              : mode == PartitionMode::Relaxed ? PartitionStatus::RelaxedRounded
                                                               : PartitionStatus::Heuristic;
    return report;
  }
  switch (mode) {
    case PartitionMode::Exact: {
      const auto p = build_problem(graph, options);
      report.partition = solve_exact(p, milp);
      report.components = report.exact_components = 1;
      return report;
    }
    case PartitionMode::Relaxed: {
      const auto p = build_problem(graph, options);
      report.partition = solve_relaxed(p);
      report.components = report.relaxed_components = 1;
      return report;
    }
    case PartitionMode::Community: {
      report.partition = partition_communities(graph, options.max_memb);
      report.components = graph.components().size();
      return report;
    }
    case PartitionMode::Auto: break;
  }

  std::vector<std::vector<std::size_t>> components;
  for (auto& comp : graph.components())
    if (comp.size() >= 2) components.push_back(std::move(comp));
  report.components = components.size();

  std::vector<IncidentPartition> parts(components.size());
  std::vector<char> exact(components.size(), 0);
  parallel_for(components.size(), jobs, [&](std::size_t c) {
    const AlertGraph sub = graph.induced(components[c]);
    PartitionOptions local = options;
    local.k = (sub.size() + options.max_card - 1) / options.max_card;
    const auto p = build_problem(sub, local);
    if (p.k <= kAutoExactColumns && sub.size() * p.k <= milp.max_integers) {
      MilpOptions bounded = milp;
      bounded.node_limit = std::min(milp.node_limit, kAutoNodeBudget);
      try {
        parts[c] = solve_exact(p, bounded);
        exact[c] = 1;
        return;
      } catch (const SolverLimitError&) {
        // fall through to the relaxation
      }
    }
    parts[c] = solve_relaxed(p);
  });

  IncidentPartition& all = report.partition;
  all.status = PartitionStatus::Optimal;
  for (std::size_t c = 0; c < components.size(); ++c) {
    for (auto& column : parts[c].columns) {
      for (auto& i : column) i = components[c][i];
      std::sort(column.begin(), column.end());
      all.columns.push_back(std::move(column));
    }
    all.diagnostics.insert(all.diagnostics.end(), parts[c].diagnostics.begin(), parts[c].diagnostics.end());
    all.objective += parts[c].objective;
    // a proven optimum is its own bound; keeps rounding noise from lifting the sum
    all.lower_bound += exact[c] ? parts[c].objective : parts[c].lower_bound;
    all.nodes_explored += parts[c].nodes_explored;
    if (exact[c]) {
      ++report.exact_components;
    } else {
      ++report.relaxed_components;
      all.status = PartitionStatus::RelaxedRounded;
    }
  }
  return report;
}

}  // namespace distill

#pragma once

// Reference computations written from the model definitions, sharing no code
// with the library beyond its data types. Tests compare the library against
// these.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "distill/alert_graph.hpp"
#include "distill/factor_graph.hpp"
#include "distill/lp.hpp"
#include "distill/partition.hpp"

namespace oracle {

using namespace distill;
using Columns = std::vector<std::vector<bool>>;  // [column][node]

/// w_ij = max of the two directed weights.
inline Matrix symmetric(const AlertGraph& g) {
  Matrix w(g.size(), std::vector<double>(g.size(), 0.0));
  for (const auto& e : g.edges) {
    w[e.from][e.to] = std::max(w[e.from][e.to], e.weight);
    w[e.to][e.from] = std::max(w[e.to][e.from], e.weight);
  }
  return w;
}

inline double big_c(const Matrix& w) {
  double best = 0.0;
  for (const auto& row : w) {
    double s = 0.0;
    for (double v : row) s += v;
    best = std::max(best, s);
  }
  return 2.0 * best;
}

/// Weight crossing between `in` and its complement.
inline double cut(const Matrix& w, const std::vector<bool>& in) {
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j)
      if (in[i] && !in[j]) total += w[i][j];
  return total;
}

inline std::size_t count(const std::vector<bool>& in) { return static_cast<std::size_t>(std::count(in.begin(), in.end(), true)); }

/// Closed-form minimal slack: sum over columns of cut + C * size.
inline double slack(const Matrix& w, const Columns& cols) {
  const double c = big_c(w);
  double total = 0.0;
  for (const auto& col : cols) total += cut(w, col) + c * static_cast<double>(count(col));
  return total;
}

inline std::size_t missing_tactics(const AlertGraph& g, const std::vector<bool>& in) {
  std::uint16_t seen = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (in[i]) seen |= g.nodes[i].tactics.mask();
  return kTacticCount - static_cast<std::size_t>(std::popcount(seen));
}

inline std::size_t asset_count(const AlertGraph& g, const std::vector<bool>& in) {
  std::set<IpAddress> assets;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (in[i]) assets.insert(g.nodes[i].assets.begin(), g.nodes[i].assets.end());
  return assets.size();
}

inline double objective(const AlertGraph& g, const Columns& cols, const PartitionOptions& o) {
  const Matrix w = symmetric(g);
  double alpha = 0.0, beta = 0.0;
  for (const auto& col : cols) {
    const auto miss = missing_tactics(g, col);
    alpha += o.tactic_penalty == TacticPenalty::One ? static_cast<double>(miss) : (miss > 0 ? 1.0 : 0.0);
    beta += static_cast<double>(asset_count(g, col));
  }
  return o.gamma0 * slack(w, cols) + o.gamma1 * alpha + o.gamma2 * beta;
}

struct Best {
  double value = std::numeric_limits<double>::infinity();
  Columns columns;
  std::size_t feasible = 0;
};

/// Every assignment of nodes to subsets of K columns that respects the
/// membership cap, the column size cap and (optionally) the cover rule.
inline Best enumerate(const AlertGraph& g, std::size_t k, const PartitionOptions& o) {
  const std::size_t n = g.size();
  std::vector<bool> has_edge(n, false);
  for (const auto& e : g.edges) has_edge[e.from] = has_edge[e.to] = true;

  Best best;
  Columns cols(k, std::vector<bool>(n, false));
  std::vector<std::size_t> sizes(k, 0);
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    if (i == n) {
      ++best.feasible;
      const double v = objective(g, cols, o);
      if (v < best.value) {
        best.value = v;
        best.columns = cols;
      }
      return;
    }
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      const int memb = std::popcount(mask);
      if (memb > o.max_memb) continue;
      if (o.cover && has_edge[i] && memb == 0) continue;
      bool fits = true;
      for (std::size_t c = 0; c < k; ++c)
        if ((mask >> c & 1u) && sizes[c] + 1 > static_cast<std::size_t>(o.max_card)) fits = false;
      if (!fits) continue;
      for (std::size_t c = 0; c < k; ++c)
        if (mask >> c & 1u) {
          cols[c][i] = true;
          ++sizes[c];
        }
      visit(i + 1);
      for (std::size_t c = 0; c < k; ++c)
        if (mask >> c & 1u) {
          cols[c][i] = false;
          --sizes[c];
        }
    }
  };
  visit(0);
  return best;
}

/// The slack program with X fixed, written out directly:
///   minimize sum s  s.t.  (L x_k)_i - t_ik - s_ik + C = 0,
///   0 <= t_ik <= 2C(1 - x_ik), s_ik >= 0.
inline double slack_lp(const Matrix& w, const Columns& cols, const LpSolver& solver) {
  const std::size_t n = w.size();
  const double c = big_c(w);
  LinearProgram lp;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double lx = 0.0;  // (L x)_i = deg_i x_i - sum_j w_ij x_j
      double deg = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        deg += w[i][j];
        if (cols[k][j]) lx -= w[i][j];
      }
      if (cols[k][i]) lx += deg;
      const auto s = lp.add_variable("s", 0.0, kInfinity, 1.0);
      const auto t = lp.add_variable("t", 0.0, kInfinity, 0.0);
      lp.add_row("bal", {{t, 1.0}, {s, 1.0}}, RowSense::Equal, lx + c);
      lp.add_row("cap", {{t, 1.0}}, RowSense::LessEqual, 2.0 * c * (cols[k][i] ? 0.0 : 1.0));
    }
  }
  const auto r = solver.solve(lp);
  if (r.status != LpStatus::Optimal) throw std::runtime_error("slack LP not optimal");
  return r.objective;
}

/// P(Active) for every variable by summing the factor product over all joint
/// states allowed by the evidence.
inline std::map<Tactic, double> marginals(const TacticFactorGraph& fg) {
  const std::size_t n = fg.variables.size();
  std::vector<double> active(n, 0.0);
  double total = 0.0;
  for (std::uint32_t state = 0; state < (1u << n); ++state) {
    bool allowed = true;
    for (const auto& [t, s] : fg.evidence) {
      for (std::size_t v = 0; v < n; ++v)
        if (fg.variables[v] == t && ((state >> v & 1u) != (s == TacticState::Active ? 1u : 0u))) allowed = false;
    }
    if (!allowed) continue;
    double p = 1.0;
    for (const auto& f : fg.factors) {
      std::uint32_t local = 0;
      for (std::size_t b = 0; b < f.scope.size(); ++b) local |= (state >> f.scope[b] & 1u) << b;
      p *= f.table[local];
    }
    total += p;
    for (std::size_t v = 0; v < n; ++v)
      if (state >> v & 1u) active[v] += p;
  }
  std::map<Tactic, double> out;
  for (std::size_t v = 0; v < n; ++v) out[fg.variables[v]] = active[v] / total;
  return out;
}

/// Acyclic iff factor-variable edges = variables + factors - components.
inline bool acyclic(const TacticFactorGraph& fg) {
  const std::size_t n = fg.variables.size(), m = fg.factors.size();
  std::vector<std::size_t> parent(n + m);
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (std::size_t f = 0; f < m; ++f)
    for (auto v : fg.factors[f].scope) {
      const auto a = find(n + f), b = find(v);
      if (a == b) return false;
      parent[a] = b;
    }
  return true;
}

}  // namespace oracle

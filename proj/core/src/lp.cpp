#include "distill/lp.hpp"

#include <algorithm>
#include <cmath>

#include "distill/error.hpp"

namespace distill {

std::size_t LinearProgram::add_variable(std::string name, double lower, double upper, double cost, bool integer) {
  if (lower > upper) throw ConfigError("variable " + name + " has lower bound above upper bound");
  variables.push_back({std::move(name), lower, upper, cost, integer});
  return variables.size() - 1;
}

std::size_t LinearProgram::add_row(std::string name, std::vector<std::pair<std::size_t, double>> terms,
                                   RowSense sense, double rhs) {
  for (const auto& [j, a] : terms)
    if (j >= variables.size()) throw InternalError("row " + name + " references an unknown variable");
  rows.push_back({std::move(name), std::move(terms), sense, rhs});
  return rows.size() - 1;
}

double LinearProgram::objective(const std::vector<double>& x) const {
  double z = objective_offset;
  for (std::size_t j = 0; j < variables.size(); ++j) z += variables[j].cost * x[j];
  return z;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < variables.size(); ++j) {
    worst = std::max(worst, variables[j].lower - x[j]);
    worst = std::max(worst, x[j] - variables[j].upper);
  }
  for (const auto& r : rows) {
    double lhs = 0.0;
    for (const auto& [j, a] : r.terms) lhs += a * x[j];
    switch (r.sense) {
      case RowSense::LessEqual: worst = std::max(worst, lhs - r.rhs); break;
      case RowSense::GreaterEqual: worst = std::max(worst, r.rhs - lhs); break;
      case RowSense::Equal: worst = std::max(worst, std::abs(lhs - r.rhs)); break;
    }
  }
  return worst;
}

std::size_t LinearProgram::integer_count() const {
  return static_cast<std::size_t>(
      std::count_if(variables.begin(), variables.end(), [](const Variable& v) { return v.integer; }));
}

namespace {

// x_j = offset + sum(coef * column)
struct VariableMap {
  double offset = 0.0;
  std::vector<std::pair<std::size_t, double>> columns;
};

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), data_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  // Row m_ holds reduced costs; its rhs cell holds -z.
  double& cost(std::size_t j) { return at(m_, j); }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    double* pr = &data_[r * (n_ + 1)];
    for (std::size_t j = 0; j <= n_; ++j) pr[j] /= p;
    pr[c] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* row = &data_[i * (n_ + 1)];
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) row[j] -= f * pr[j];
      row[c] = 0.0;
    }
  }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

 private:
  std::size_t m_, n_;
  std::vector<double> data_;
};

enum class PhaseResult { Optimal, Unbounded };

class Engine {
 public:
  Engine(Tableau& t, std::vector<std::size_t>& basis, const SimplexOptions& opt, std::size_t& iterations)
      : t_(t), basis_(basis), opt_(opt), iterations_(iterations) {}

  PhaseResult run(const std::vector<double>& cost, const std::vector<char>& allowed) {
    const std::size_t m = t_.rows(), n = t_.cols();
    for (std::size_t j = 0; j <= n; ++j) t_.cost(j) = j < n ? cost[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= n; ++j) t_.cost(j) -= cb * t_.at(i, j);
    }
    bool bland = false;
    std::size_t streak = 0;
    while (true) {
      std::size_t enter = n;
      double best = -opt_.tolerance;
      for (std::size_t j = 0; j < n; ++j) {
        if (!allowed[j]) continue;
        const double d = t_.cost(j);
        if (d < best) {
          enter = j;
          best = d;
          if (bland) break;
        }
      }
      if (enter == n) return PhaseResult::Optimal;

      std::size_t leave = m;
      double ratio = kInfinity;
      for (std::size_t i = 0; i < m; ++i) {
        const double a = t_.at(i, enter);
        if (a <= opt_.tolerance) continue;
        const double r = std::max(0.0, t_.rhs(i)) / a;
        if (leave == m || r < ratio - opt_.tolerance) {
          leave = i;
          ratio = r;
        } else if (r <= ratio + opt_.tolerance && basis_[i] < basis_[leave]) {
          leave = i;  // ties leave by lowest column index
          ratio = std::min(ratio, r);
        }
      }
      if (leave == m) return PhaseResult::Unbounded;

      if (ratio <= opt_.tolerance) {
        if (++streak >= opt_.degenerate_streak) bland = true;
      } else {
        streak = 0;
        bland = false;
      }
      t_.pivot(leave, enter);
      basis_[leave] = enter;
      if (++iterations_ > opt_.max_iterations)
        throw SolverLimitError("simplex iteration limit (" + std::to_string(opt_.max_iterations) + ") reached");
    }
  }

 private:
  Tableau& t_;
  std::vector<std::size_t>& basis_;
  const SimplexOptions& opt_;
  std::size_t& iterations_;
};

}  // namespace

LpResult SimplexSolver::solve(const LinearProgram& lp) const {
  const double tol = options_.tolerance;

  // Shift and split variables so every column is >= 0.
  std::vector<VariableMap> maps(lp.variables.size());
  std::size_t columns = 0;
  struct UpperRow {
    std::size_t column;
    double bound;
  };
  std::vector<UpperRow> upper_rows;
  std::vector<double> column_cost;
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    const auto& v = lp.variables[j];
    auto& map = maps[j];
    if (std::isfinite(v.lower) && std::isfinite(v.upper) && v.upper - v.lower <= tol) {
      map.offset = v.lower;
    } else if (std::isfinite(v.lower)) {
      map.offset = v.lower;
      map.columns.push_back({columns, 1.0});
      column_cost.push_back(v.cost);
      if (std::isfinite(v.upper)) upper_rows.push_back({columns, v.upper - v.lower});
      ++columns;
    } else if (std::isfinite(v.upper)) {
      map.offset = v.upper;
      map.columns.push_back({columns++, -1.0});
      column_cost.push_back(-v.cost);
    } else {
      map.columns.push_back({columns++, 1.0});
      map.columns.push_back({columns++, -1.0});
      column_cost.push_back(v.cost);
      column_cost.push_back(-v.cost);
    }
  }
  const std::size_t structural = columns;

  struct DenseRow {
    std::vector<std::pair<std::size_t, double>> terms;
    RowSense sense;
    double rhs;
  };
  std::vector<DenseRow> rows;
  rows.reserve(lp.rows.size() + upper_rows.size());
  for (const auto& r : lp.rows) {
    DenseRow d{{}, r.sense, r.rhs};
    for (const auto& [j, a] : r.terms) {
      d.rhs -= a * maps[j].offset;
      for (const auto& [c, s] : maps[j].columns) d.terms.push_back({c, a * s});
    }
    if (d.terms.empty()) {
      const bool ok = (d.sense == RowSense::LessEqual && d.rhs >= -1e-7) ||
                      (d.sense == RowSense::GreaterEqual && d.rhs <= 1e-7) ||
                      (d.sense == RowSense::Equal && std::abs(d.rhs) <= 1e-7);
      if (!ok) return LpResult{LpStatus::Infeasible, 0.0, {}, 0};
      continue;
    }
    rows.push_back(std::move(d));
  }
  for (const auto& u : upper_rows) rows.push_back({{{u.column, 1.0}}, RowSense::LessEqual, u.bound});

  for (auto& r : rows) {
    if (r.rhs < 0.0) {
      r.rhs = -r.rhs;
      for (auto& t : r.terms) t.second = -t.second;
      if (r.sense == RowSense::LessEqual) {
        r.sense = RowSense::GreaterEqual;
      } else if (r.sense == RowSense::GreaterEqual) {
        r.sense = RowSense::LessEqual;
      }
    }
  }

  // Column layout: structural | slack/surplus | artificial.
  const std::size_t m = rows.size();
  std::size_t slack_count = 0, artificial_count = 0;
  for (const auto& r : rows) {
    if (r.sense != RowSense::Equal) ++slack_count;
    if (r.sense != RowSense::LessEqual) ++artificial_count;
  }
  const std::size_t n = structural + slack_count + artificial_count;
  const std::size_t first_artificial = structural + slack_count;
  Tableau t(m, n);
  std::vector<std::size_t> basis(m);
  std::size_t next_slack = structural, next_art = first_artificial;
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& [c, a] : rows[i].terms) t.at(i, c) += a;
    t.rhs(i) = rows[i].rhs;
    switch (rows[i].sense) {
      case RowSense::LessEqual:
        t.at(i, next_slack) = 1.0;
        basis[i] = next_slack++;
        break;
      case RowSense::GreaterEqual:
        t.at(i, next_slack++) = -1.0;
        t.at(i, next_art) = 1.0;
        basis[i] = next_art++;
        break;
      case RowSense::Equal:
        t.at(i, next_art) = 1.0;
        basis[i] = next_art++;
        break;
    }
  }

  LpResult result;
  Engine engine(t, basis, options_, result.iterations);
  std::vector<char> allowed(n, 1);

  if (artificial_count > 0) {
    std::vector<double> phase1(n, 0.0);
    for (std::size_t j = first_artificial; j < n; ++j) phase1[j] = 1.0;
    engine.run(phase1, allowed);
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] >= first_artificial) infeasibility += t.rhs(i);
    double scale = 1.0;
    for (const auto& r : rows) scale = std::max(scale, r.rhs);
    if (infeasibility > 1e-7 * scale) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < first_artificial) continue;
      std::size_t pick = first_artificial;
      double best = tol;
      for (std::size_t j = 0; j < first_artificial; ++j) {
        if (std::abs(t.at(i, j)) > best) {
          best = std::abs(t.at(i, j));
          pick = j;
        }
      }
      if (pick < first_artificial) {
        t.pivot(i, pick);
        basis[i] = pick;
      }
    }
    for (std::size_t j = first_artificial; j < n; ++j) allowed[j] = 0;
  }

  std::vector<double> phase2(n, 0.0);
  std::copy(column_cost.begin(), column_cost.end(), phase2.begin());
  if (engine.run(phase2, allowed) == PhaseResult::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  std::vector<double> column_value(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) column_value[basis[i]] = std::max(0.0, t.rhs(i));
  result.x.resize(lp.variables.size());
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    double v = maps[j].offset;
    for (const auto& [c, s] : maps[j].columns) v += s * column_value[c];
    result.x[j] = v;
  }
  result.status = LpStatus::Optimal;
  result.objective = lp.objective(result.x);
  return result;
}

}  // namespace distill

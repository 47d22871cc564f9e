#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace distill {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, GreaterEqual, Equal };

/// Linear (mixed-integer) program: minimize c^T x subject to rows and bounds.
struct LinearProgram {
  struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInfinity;
    double cost = 0.0;
    bool integer = false;
  };
  struct Row {
    std::string name;
    std::vector<std::pair<std::size_t, double>> terms;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
  };

  std::vector<Variable> variables;
  std::vector<Row> rows;
  double objective_offset = 0.0;

  std::size_t add_variable(std::string name, double lower, double upper, double cost, bool integer = false);
  std::size_t add_row(std::string name, std::vector<std::pair<std::size_t, double>> terms, RowSense sense,
                      double rhs);

  double objective(const std::vector<double>& x) const;
  /// Largest bound or row violation at x.
  double max_violation(const std::vector<double>& x) const;
  std::size_t integer_count() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
};

/// Continuous relaxation solver; integrality flags are ignored.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  virtual LpResult solve(const LinearProgram& lp) const = 0;
};

struct SimplexOptions {
  std::size_t max_iterations = 200000;
  double tolerance = 1e-9;
  /// Degenerate pivots in a row before switching from Dantzig to Bland pricing.
  std::size_t degenerate_streak = 50;
};

/// Dense two-phase primal simplex on a full tableau. Throws SolverLimitError
/// when the iteration budget runs out.
class SimplexSolver final : public LpSolver {
 public:
  explicit SimplexSolver(SimplexOptions options = {}) : options_(options) {}
  LpResult solve(const LinearProgram& lp) const override;

 private:
  SimplexOptions options_;
};

/// CPLEX LP text format (Minimize / Subject To / Bounds / Binaries / Generals / End).
std::string to_lp_text(const LinearProgram& lp);
/// Reads the subset of the LP format that to_lp_text writes.
LinearProgram parse_lp_text(const std::string& text);

}  // namespace distill

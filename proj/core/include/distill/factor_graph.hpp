#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "distill/alert.hpp"
#include "distill/transition_matrix.hpp"

namespace distill {

enum class TacticState : std::uint8_t { Inactive, Active };

std::string_view tactic_state_name(TacticState s) noexcept;
std::optional<TacticState> parse_tactic_state(std::string_view text);

/// Analyst assertions: tactic -> clamped state.
using Evidence = std::map<Tactic, TacticState>;

struct Factor {
  enum class Kind : std::uint8_t { Alert, Transition };

  Kind kind = Kind::Alert;
  std::string label;               // alert id, or "IA->EX" for transitions
  std::vector<std::size_t> scope;  // variable indices
  /// Entry at index s: bit b of s is the state of scope[b] (1 = Active).
  std::vector<double> table;

  double at(std::uint32_t scope_state) const { return table[scope_state]; }
};

/// Bipartite graph of tactic variables and alert/transition factors for one incident.
struct TacticFactorGraph {
  std::vector<Tactic> variables;  // canonical order
  std::vector<Factor> factors;
  double false_indication = 0.2;
  std::map<Tactic, Timestamp> tactic_time;
  Evidence evidence;

  std::optional<std::size_t> variable_index(Tactic t) const;
};

struct TacticScores {
  std::map<Tactic, double> marginals;  // P(Active)
  bool converged = true;
  std::size_t iterations = 0;

  double at(Tactic t) const { return marginals.at(t); }
  double max_score() const;
};

/// Table over the alert's tactics: one tactic gives {p, 1-p}; with several,
/// an active set A scores min(p, max over ordered pairs in A of T) when
/// |A| >= 2, p when |A| = 1 and 1-p when nothing is active.
Factor alert_factor(const GeneralizedAlert& alert, const TransitionMatrix& transitions,
                    const std::vector<Tactic>& variables);

/// Pairwise table {(A,A): mu, (A,I): 1-mu, (I,A): 1-mu, (I,I): false_indication}
/// with mu taken in the observed temporal order (ties: canonical order).
Factor transition_factor(Tactic a, Tactic b, const std::map<Tactic, Timestamp>& times,
                         const TransitionMatrix& transitions, double false_indication,
                         const std::vector<Tactic>& variables);

/// One variable per tactic present, one factor per alert, one transition
/// factor per unordered tactic pair.
TacticFactorGraph build_fg(std::span<const GeneralizedAlert> alerts, const TransitionMatrix& transitions,
                           double false_indication = 0.2);

/// Copy with evidence clamped; throws DataError for tactics not in the graph.
TacticFactorGraph apply_evidence(TacticFactorGraph fg, const Evidence& evidence);

/// Copy without the factor of alert `alert_id`; throws DataError if absent.
TacticFactorGraph remove_alert_factor(TacticFactorGraph fg, std::string_view alert_id);

/// Marginals by summing the factor product over every joint state consistent
/// with the graph's evidence. Throws DataError when the total mass is zero.
TacticScores infer_exact(const TacticFactorGraph& fg);

struct SumProductOptions {
  std::size_t max_iterations = 200;
  double damping = 0.5;  // applied only when the graph has cycles
  double tolerance = 1e-6;
};

/// Loopy belief propagation with a synchronous flooding schedule. Acyclic
/// graphs run undamped and are exact at convergence.
TacticScores infer_sum_product(const TacticFactorGraph& fg, const SumProductOptions& options = {});

bool is_tree(const TacticFactorGraph& fg);

/// The three-alert demo incident: Initial Access, then Lateral Movement, then
/// Execution, all on one host, with the given alert scores.
std::vector<GeneralizedAlert> evidence_demo_alerts(double p_ia, double p_ex, double p_lm);

struct Calibration {
  double p_ia = 0.0, p_ex = 0.0, p_lm = 0.0;
  double error = 0.0;  // max-abs error against the target baseline
};

/// Grid search over {0.01..0.99}^3 for demo alert scores whose exact baseline
/// marginals (IA, EX, LM) best match `target`.
Calibration calibrate_appendix(const std::array<double, 3>& target = {0.9374, 0.6901, 0.5111});

}  // namespace distill

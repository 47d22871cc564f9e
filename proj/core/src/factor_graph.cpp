#include "distill/factor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "distill/error.hpp"

namespace distill {

std::string_view tactic_state_name(TacticState s) noexcept { return s == TacticState::Active ? "Active" : "Inactive"; }

std::optional<TacticState> parse_tactic_state(std::string_view text) {
  if (text == "Active" || text == "active") return TacticState::Active;
  if (text == "Inactive" || text == "inactive") return TacticState::Inactive;
  return std::nullopt;
}

std::optional<std::size_t> TacticFactorGraph::variable_index(Tactic t) const {
  auto it = std::lower_bound(variables.begin(), variables.end(), t);
  if (it == variables.end() || *it != t) return std::nullopt;
  return static_cast<std::size_t>(it - variables.begin());
}

double TacticScores::max_score() const {
  double best = 0.0;
  for (const auto& [t, p] : marginals) best = std::max(best, p);
  return best;
}

namespace {

std::size_t require_index(const std::vector<Tactic>& variables, Tactic t) {
  auto it = std::lower_bound(variables.begin(), variables.end(), t);
  if (it == variables.end() || *it != t)
    throw DataError("tactic " + std::string(tactic_name(t)) + " is not a variable of the factor graph");
  return static_cast<std::size_t>(it - variables.begin());
}

}  // namespace

Factor alert_factor(const GeneralizedAlert& alert, const TransitionMatrix& transitions,
                    const std::vector<Tactic>& variables) {
  if (alert.tactics.empty()) throw FieldError("tactics", "alert " + alert.id + " maps to no tactic");
  const auto tactics = alert.tactics.to_vector();
  if (tactics.size() > kTacticCount) throw InternalError("too many tactics on one alert");
  Factor f;
  f.kind = Factor::Kind::Alert;
  f.label = alert.id;
  for (auto t : tactics) f.scope.push_back(require_index(variables, t));
  const double p = alert.score;
  f.table.resize(std::size_t{1} << tactics.size());
  for (std::uint32_t s = 0; s < f.table.size(); ++s) {
    std::vector<Tactic> active;
    for (std::size_t b = 0; b < tactics.size(); ++b)
      if (s & (1u << b)) active.push_back(tactics[b]);
    if (active.empty()) {
      f.table[s] = 1.0 - p;
    } else if (active.size() == 1) {
      f.table[s] = p;
    } else {
      double best = 0.0;
      for (auto a : active)
        for (auto b : active)
          if (a != b) best = std::max(best, transitions(a, b));
      f.table[s] = std::min(p, best);
    }
  }
  return f;
}

Factor transition_factor(Tactic a, Tactic b, const std::map<Tactic, Timestamp>& times,
                         const TransitionMatrix& transitions, double false_indication,
                         const std::vector<Tactic>& variables) {
  if (a == b) throw InternalError("transition factor needs two distinct tactics");
  const auto ta = times.find(a), tb = times.find(b);
  if (ta == times.end() || tb == times.end()) throw DataError("transition factor: missing tactic time");
  const bool a_first = ta->second < tb->second || (ta->second == tb->second && index_of(a) < index_of(b));
  const Tactic first = a_first ? a : b;
  const Tactic second = a_first ? b : a;
  const double mu = transitions(first, second);
  Factor f;
  f.kind = Factor::Kind::Transition;
  f.label = std::string(tactic_code(first)) + "->" + std::string(tactic_code(second));
  f.scope = {require_index(variables, a), require_index(variables, b)};
  f.table = {false_indication, 1.0 - mu, 1.0 - mu, mu};
  return f;
}

TacticFactorGraph build_fg(std::span<const GeneralizedAlert> alerts, const TransitionMatrix& transitions,
                           double false_indication) {
  if (alerts.empty()) throw DataError("factor graph: incident has no alerts");
  if (!(false_indication >= 0.0)) throw ConfigError("falseIndication must be non-negative");
  TacticFactorGraph fg;
  fg.false_indication = false_indication;
  TacticSet present;
  for (const auto& a : alerts) {
    present |= a.tactics;
    for (auto t : a.tactics.to_vector()) {
      auto [it, inserted] = fg.tactic_time.try_emplace(t, a.first_seen);
      if (!inserted) it->second = std::min(it->second, a.first_seen);
    }
  }
  fg.variables = present.to_vector();
  for (const auto& a : alerts) fg.factors.push_back(alert_factor(a, transitions, fg.variables));
  for (std::size_t i = 0; i < fg.variables.size(); ++i)
    for (std::size_t j = i + 1; j < fg.variables.size(); ++j)
      fg.factors.push_back(transition_factor(fg.variables[i], fg.variables[j], fg.tactic_time, transitions,
                                             false_indication, fg.variables));
  return fg;
}

TacticFactorGraph apply_evidence(TacticFactorGraph fg, const Evidence& evidence) {
  for (const auto& [t, state] : evidence) {
    if (!fg.variable_index(t))
      throw DataError("evidence on tactic " + std::string(tactic_name(t)) + ", which is not in the incident");
    fg.evidence[t] = state;
  }
  return fg;
}

TacticFactorGraph remove_alert_factor(TacticFactorGraph fg, std::string_view alert_id) {
  auto it = std::find_if(fg.factors.begin(), fg.factors.end(),
                         [&](const Factor& f) { return f.kind == Factor::Kind::Alert && f.label == alert_id; });
  if (it == fg.factors.end()) throw DataError("alert " + std::string(alert_id) + " is not in the incident");
  fg.factors.erase(it);
  return fg;
}

TacticScores infer_exact(const TacticFactorGraph& fg) {
  const std::size_t n = fg.variables.size();
  if (n > kTacticCount) throw InternalError("factor graph has more than 12 variables");
  std::uint32_t fixed_mask = 0, fixed_value = 0;
  for (const auto& [t, state] : fg.evidence) {
    const auto i = require_index(fg.variables, t);
    fixed_mask |= 1u << i;
    if (state == TacticState::Active) fixed_value |= 1u << i;
  }
  double total = 0.0;
  std::vector<double> active(n, 0.0);
  const std::uint32_t states = 1u << n;
  for (std::uint32_t s = 0; s < states; ++s) {
    if ((s & fixed_mask) != fixed_value) continue;
    double w = 1.0;
    for (const auto& f : fg.factors) {
      std::uint32_t local = 0;
      for (std::size_t b = 0; b < f.scope.size(); ++b)
        if (s & (1u << f.scope[b])) local |= 1u << b;
      w *= f.table[local];
      if (w == 0.0) break;
    }
    total += w;
    for (std::size_t i = 0; i < n; ++i)
      if (s & (1u << i)) active[i] += w;
  }
  if (!(total > 0.0)) throw DataError("factor graph has zero total mass under the given evidence");
  TacticScores scores;
  for (std::size_t i = 0; i < n; ++i) scores.marginals[fg.variables[i]] = active[i] / total;
  return scores;
}

bool is_tree(const TacticFactorGraph& fg) {
  const std::size_t nv = fg.variables.size();
  const std::size_t nodes = nv + fg.factors.size();
  std::vector<std::size_t> parent(nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t f = 0; f < fg.factors.size(); ++f) {
    for (auto v : fg.factors[f].scope) {
      auto a = find(nv + f), b = find(v);
      if (a == b) return false;  // this edge closes a cycle
      parent[a] = b;
    }
  }
  return true;
}

namespace {

using Message = std::array<double, 2>;

void normalize(Message& m) {
  const double s = m[0] + m[1];
  if (s > 0.0 && std::isfinite(s)) {
    m[0] /= s;
    m[1] /= s;
  } else {
    m = {0.5, 0.5};
  }
}

}  // namespace

TacticScores infer_sum_product(const TacticFactorGraph& fg, const SumProductOptions& options) {
  if (options.max_iterations < 1) throw ConfigError("sum-product needs at least one iteration");
  const std::size_t nv = fg.variables.size();

  std::vector<Message> prior(nv, Message{1.0, 1.0});
  for (const auto& [t, state] : fg.evidence) {
    const auto i = require_index(fg.variables, t);
    prior[i] = state == TacticState::Active ? Message{0.0, 1.0} : Message{1.0, 0.0};
  }

  // Edge e joins factor edge_factor[e] (at scope position edge_pos[e]) and variable edge_var[e].
  std::vector<std::size_t> edge_factor, edge_pos, edge_var;
  std::vector<std::vector<std::size_t>> factor_edges(fg.factors.size()), var_edges(nv);
  for (std::size_t f = 0; f < fg.factors.size(); ++f)
    for (std::size_t b = 0; b < fg.factors[f].scope.size(); ++b) {
      const std::size_t e = edge_var.size();
      edge_factor.push_back(f);
      edge_pos.push_back(b);
      edge_var.push_back(fg.factors[f].scope[b]);
      factor_edges[f].push_back(e);
      var_edges[fg.factors[f].scope[b]].push_back(e);
    }
  const std::size_t ne = edge_var.size();
  // On a tree, undamped flooding reaches the exact fixed point within the
  // diameter, so iterate until messages stop changing at all.
  const bool tree = is_tree(fg);
  const double damping = tree ? 0.0 : options.damping;
  const std::size_t max_iterations = tree ? std::max(options.max_iterations, ne + 2) : options.max_iterations;

  std::vector<Message> to_factor(ne), to_var(ne, Message{0.5, 0.5}), fresh(ne);
  auto update_to_factor = [&] {
    for (std::size_t e = 0; e < ne; ++e) {
      Message m = prior[edge_var[e]];
      for (auto other : var_edges[edge_var[e]])
        if (other != e) {
          m[0] *= to_var[other][0];
          m[1] *= to_var[other][1];
        }
      normalize(m);
      to_factor[e] = m;
    }
  };
  update_to_factor();

  TacticScores scores;
  scores.converged = false;
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    for (std::size_t f = 0; f < fg.factors.size(); ++f) {
      const Factor& factor = fg.factors[f];
      for (auto e : factor_edges[f]) {
        Message m{0.0, 0.0};
        const std::size_t pos = edge_pos[e];
        for (std::uint32_t s = 0; s < factor.table.size(); ++s) {
          double w = factor.table[s];
          for (auto other : factor_edges[f])
            if (other != e) w *= to_factor[other][(s >> edge_pos[other]) & 1u];
          m[(s >> pos) & 1u] += w;
        }
        normalize(m);
        fresh[e] = m;
      }
    }
    double delta = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
      Message m{(1.0 - damping) * fresh[e][0] + damping * to_var[e][0],
                (1.0 - damping) * fresh[e][1] + damping * to_var[e][1]};
      normalize(m);
      delta = std::max({delta, std::abs(m[0] - to_var[e][0]), std::abs(m[1] - to_var[e][1])});
      to_var[e] = m;
    }
    update_to_factor();
    scores.iterations = iter + 1;
    if (tree ? delta == 0.0 : delta < options.tolerance) {
      scores.converged = true;
      break;
    }
  }

  for (std::size_t v = 0; v < nv; ++v) {
    Message b = prior[v];
    for (auto e : var_edges[v]) {
      b[0] *= to_var[e][0];
      b[1] *= to_var[e][1];
    }
    const double s = b[0] + b[1];
    if (!(s > 0.0)) throw DataError("factor graph has zero belief mass under the given evidence");
    scores.marginals[fg.variables[v]] = b[1] / s;
  }
  return scores;
}

std::vector<GeneralizedAlert> evidence_demo_alerts(double p_ia, double p_ex, double p_lm) {
  const auto host = *IpAddress::parse("10.0.0.5");
  const auto outside = *IpAddress::parse("198.51.100.7");
  const Timestamp t0 = *parse_timestamp("2020-01-01T00:00:00Z");
  auto make = [&](std::string id, std::string source, std::string signature, Tactic tactic, double p, int minute) {
    GeneralizedAlert a;
    a.id = id;
    a.source = std::move(source);
    a.signature = std::move(signature);
    a.kind = SourceKind::Custom;
    a.attributes = {{"dstIP", AttributeValue::ip(host)}, {"srcIP", AttributeValue::ip(outside)}};
    a.score = p;
    a.members = {id};
    a.first_seen = a.last_seen = t0 + std::chrono::minutes(minute);
    a.tactics = {tactic};
    a.assets = {host};
    return a;
  };
  return {
      make("demo-1", "demo-initial-access", "Suspicious logon from external address", Tactic::InitialAccess, p_ia, 0),
      make("demo-2", "demo-lateral-movement", "Remote service creation", Tactic::LateralMovement, p_lm, 10),
      make("demo-3", "demo-execution", "Scripting engine spawned by service", Tactic::Execution, p_ex, 20),
  };
}

Calibration calibrate_appendix(const std::array<double, 3>& target) {
  auto alerts = evidence_demo_alerts(0.5, 0.5, 0.5);
  TacticFactorGraph fg = build_fg(alerts, default_transition_matrix());
  // Alert factors come first, in alert order: IA, LM, EX.
  Factor& ia = fg.factors[0];
  Factor& lm = fg.factors[1];
  Factor& ex = fg.factors[2];
  const auto i_ia = *fg.variable_index(Tactic::InitialAccess);
  const auto i_ex = *fg.variable_index(Tactic::Execution);
  const auto i_lm = *fg.variable_index(Tactic::LateralMovement);

  Calibration best;
  best.error = std::numeric_limits<double>::infinity();
  for (int a = 1; a <= 99; ++a) {
    const double pa = a / 100.0;
    ia.table = {1.0 - pa, pa};
    for (int e = 1; e <= 99; ++e) {
      const double pe = e / 100.0;
      ex.table = {1.0 - pe, pe};
      for (int l = 1; l <= 99; ++l) {
        const double pl = l / 100.0;
        lm.table = {1.0 - pl, pl};
        const auto scores = infer_exact(fg);
        const double err = std::max({std::abs(scores.marginals.at(fg.variables[i_ia]) - target[0]),
                                     std::abs(scores.marginals.at(fg.variables[i_ex]) - target[1]),
                                     std::abs(scores.marginals.at(fg.variables[i_lm]) - target[2])});
        if (err < best.error) best = {pa, pe, pl, err};
      }
    }
  }
  return best;
}

}  // namespace distill

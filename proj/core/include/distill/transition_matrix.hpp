#pragma once

#include <array>
#include <string>
#include <string_view>

#include "distill/tactic.hpp"

namespace distill {

/// 12x12 tactic transition weights indexed by (from, to).
class TransitionMatrix {
 public:
  TransitionMatrix() = default;

  double operator()(Tactic from, Tactic to) const noexcept { return w_[index_of(from)][index_of(to)]; }
  void set(Tactic from, Tactic to, double weight);

  /// Max over ordered pairs (t in from, t' in to) of T(t, t'); 0 for empty sets.
  double max_transition(const TacticSet& from, const TacticSet& to) const noexcept;

  /// Parses the CSV layout: header row and first column of tactic names.
  static TransitionMatrix from_csv(std::string_view csv);
  static TransitionMatrix load(const std::string& path);
  std::string to_csv() const;

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

 private:
  std::array<std::array<double, kTacticCount>, kTacticCount> w_{};
};

/// Default ATT&CK transition weights, embedded from data/transition_matrix.csv.
const TransitionMatrix& default_transition_matrix();

}  // namespace distill

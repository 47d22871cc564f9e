#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace distill {

/// MITRE ATT&CK tactics in canonical kill-chain order.
enum class Tactic : std::uint8_t {
  InitialAccess,
  Execution,
  Persistence,
  PrivilegeEscalation,
  DefenseEvasion,
  CredentialAccess,
  Discovery,
  LateralMovement,
  Collection,
  CommandAndControl,
  Exfiltration,
  Impact,
};

inline constexpr std::size_t kTacticCount = 12;

constexpr std::size_t index_of(Tactic t) noexcept { return static_cast<std::size_t>(t); }
Tactic tactic_at(std::size_t index);

std::string_view tactic_name(Tactic t) noexcept;
/// Two-letter code (IA, EX, PE, ...).
std::string_view tactic_code(Tactic t) noexcept;

/// Accepts canonical names, spaced names ("Initial Access"), kebab/snake case
/// and two-letter codes, case-insensitively.
std::optional<Tactic> parse_tactic(std::string_view text);

const std::array<Tactic, kTacticCount>& all_tactics() noexcept;

/// Small value-type set of tactics; iteration is in canonical order.
class TacticSet {
 public:
  TacticSet() = default;
  TacticSet(std::initializer_list<Tactic> tactics) {
    for (auto t : tactics) insert(t);
  }

  void insert(Tactic t) { bits_.set(index_of(t)); }
  void erase(Tactic t) { bits_.reset(index_of(t)); }
  bool contains(Tactic t) const { return bits_.test(index_of(t)); }
  bool empty() const { return bits_.none(); }
  std::size_t size() const { return bits_.count(); }

  TacticSet& operator|=(const TacticSet& other) {
    bits_ |= other.bits_;
    return *this;
  }
  friend TacticSet operator|(TacticSet a, const TacticSet& b) { return a |= b; }
  friend bool operator==(const TacticSet& a, const TacticSet& b) { return a.bits_ == b.bits_; }

  std::vector<Tactic> to_vector() const;
  std::uint16_t mask() const { return static_cast<std::uint16_t>(bits_.to_ulong()); }

  /// Comma separated canonical names.
  std::string to_string() const;

 private:
  std::bitset<kTacticCount> bits_;
};

/// Parses a comma separated tactic list; throws ConfigError on unknown names.
TacticSet parse_tactic_list(std::string_view text);

}  // namespace distill

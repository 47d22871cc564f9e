#include "distill/tactic.hpp"

#include <algorithm>
#include <cctype>

#include "distill/error.hpp"

namespace distill {

namespace {

constexpr std::array<std::string_view, kTacticCount> kNames = {
    "InitialAccess",   "Execution", "Persistence",     "PrivilegeEscalation",
    "DefenseEvasion",  "CredentialAccess", "Discovery", "LateralMovement",
    "Collection",      "CommandAndControl", "Exfiltration", "Impact",
};

constexpr std::array<std::string_view, kTacticCount> kCodes = {
    "IA", "EX", "PE", "PR", "DE", "CA", "DI", "LM", "CO", "C2", "EF", "IM",
};

std::string fold(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == ' ' || c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

Tactic tactic_at(std::size_t index) {
  if (index >= kTacticCount) throw InternalError("tactic index out of range");
  return static_cast<Tactic>(index);
}

std::string_view tactic_name(Tactic t) noexcept { return kNames[index_of(t)]; }
std::string_view tactic_code(Tactic t) noexcept { return kCodes[index_of(t)]; }

std::optional<Tactic> parse_tactic(std::string_view text) {
  const std::string key = fold(text);
  if (key.empty()) return std::nullopt;
  for (std::size_t i = 0; i < kTacticCount; ++i) {
    if (key == fold(kNames[i]) || key == fold(kCodes[i])) return static_cast<Tactic>(i);
  }
  return std::nullopt;
}

const std::array<Tactic, kTacticCount>& all_tactics() noexcept {
  static const std::array<Tactic, kTacticCount> tactics = [] {
    std::array<Tactic, kTacticCount> out{};
    for (std::size_t i = 0; i < kTacticCount; ++i) out[i] = static_cast<Tactic>(i);
    return out;
  }();
  return tactics;
}

std::vector<Tactic> TacticSet::to_vector() const {
  std::vector<Tactic> out;
  for (std::size_t i = 0; i < kTacticCount; ++i)
    if (bits_.test(i)) out.push_back(static_cast<Tactic>(i));
  return out;
}

std::string TacticSet::to_string() const {
  std::string out;
  for (auto t : to_vector()) {
    if (!out.empty()) out += ',';
    out += tactic_name(t);
  }
  return out;
}

TacticSet parse_tactic_list(std::string_view text) {
  TacticSet set;
  std::string token;
  auto flush = [&] {
    // Trim surrounding spaces but keep inner ones ("Initial Access").
    auto b = token.find_first_not_of(' ');
    auto e = token.find_last_not_of(' ');
    if (b != std::string::npos) {
      auto name = token.substr(b, e - b + 1);
      auto t = parse_tactic(name);
      if (!t) throw ConfigError("unknown tactic '" + name + "'");
      set.insert(*t);
    }
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ';' || c == '\t') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return set;
}

}  // namespace distill

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "distill/error.hpp"
#include "distill/keyvalue.hpp"
#include "distill/lp.hpp"

namespace distill {

namespace {

std::string coef_text(double a) { return format_real(a); }

void write_terms(std::ostringstream& out, const LinearProgram& lp,
                 const std::vector<std::pair<std::size_t, double>>& terms) {
  bool first = true;
  for (const auto& [j, a] : terms) {
    if (a == 0.0) continue;
    out << (first ? (a < 0 ? "- " : "") : (a < 0 ? " - " : " + ")) << coef_text(std::abs(a)) << ' '
        << lp.variables[j].name;
    first = false;
  }
  if (first) out << "0 " << (lp.variables.empty() ? "x" : lp.variables.front().name);
}

std::string lower_case(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_number(const std::string& tok) { return parse_real(tok).has_value() || tok == "inf" || tok == "-inf" || tok == "+inf"; }

double number(const std::string& tok) {
  if (tok == "inf" || tok == "+inf" || tok == "infinity") return kInfinity;
  if (tok == "-inf" || tok == "-infinity") return -kInfinity;
  auto v = parse_real(tok[0] == '+' ? tok.substr(1) : tok);
  if (!v) throw DataError("LP text: expected a number, got '" + tok + "'");
  return *v;
}

bool is_operator(const std::string& tok) {
  return tok == "<=" || tok == ">=" || tok == "=" || tok == "<" || tok == ">" || tok == "=<" || tok == "=>";
}

RowSense sense_of(const std::string& op) {
  if (op == "<=" || op == "<" || op == "=<") return RowSense::LessEqual;
  if (op == ">=" || op == ">" || op == "=>") return RowSense::GreaterEqual;
  return RowSense::Equal;
}

}  // namespace

std::string to_lp_text(const LinearProgram& lp) {
  std::ostringstream out;
  out << "\\ " << lp.variables.size() << " variables, " << lp.rows.size() << " constraints\n";
  out << "Minimize\n obj: ";
  std::vector<std::pair<std::size_t, double>> cost;
  for (std::size_t j = 0; j < lp.variables.size(); ++j)
    if (lp.variables[j].cost != 0.0) cost.push_back({j, lp.variables[j].cost});
  write_terms(out, lp, cost);
  if (lp.objective_offset != 0.0)
    out << (lp.objective_offset < 0 ? " - " : " + ") << coef_text(std::abs(lp.objective_offset));
  out << "\nSubject To\n";
  for (const auto& r : lp.rows) {
    out << ' ' << r.name << ": ";
    write_terms(out, lp, r.terms);
    out << (r.sense == RowSense::LessEqual ? " <= " : r.sense == RowSense::GreaterEqual ? " >= " : " = ")
        << coef_text(r.rhs) << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : lp.variables) {
    const bool binary = v.integer && v.lower == 0.0 && v.upper == 1.0;
    if (binary) continue;
    if (v.lower == 0.0 && v.upper == kInfinity) continue;
    if (v.lower == -kInfinity && v.upper == kInfinity) {
      out << ' ' << v.name << " free\n";
    } else if (v.lower == v.upper) {
      out << ' ' << v.name << " = " << coef_text(v.lower) << '\n';
    } else {
      out << ' ' << (v.lower == -kInfinity ? std::string("-inf") : coef_text(v.lower)) << " <= " << v.name << " <= "
          << (v.upper == kInfinity ? std::string("inf") : coef_text(v.upper)) << '\n';
    }
  }
  std::string binaries, generals;
  for (const auto& v : lp.variables) {
    if (!v.integer) continue;
    ((v.lower == 0.0 && v.upper == 1.0) ? binaries : generals) += ' ' + v.name + '\n';
  }
  if (!binaries.empty()) out << "Binaries\n" << binaries;
  if (!generals.empty()) out << "Generals\n" << generals;
  out << "End\n";
  return out.str();
}

LinearProgram parse_lp_text(const std::string& text) {
  enum class Section { None, Objective, Constraints, Bounds, Binaries, Generals, End };
  LinearProgram lp;
  std::map<std::string, std::size_t> index;
  auto var = [&](const std::string& name) {
    auto [it, inserted] = index.try_emplace(name, lp.variables.size());
    if (inserted) lp.variables.push_back({name, 0.0, kInfinity, 0.0, false});
    return it->second;
  };

  // Flatten to a token stream, tracking section keywords at line starts.
  std::vector<std::pair<Section, std::vector<std::string>>> statements;
  Section section = Section::None;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> pending;
  auto flush = [&] {
    if (!pending.empty()) statements.push_back({section, std::move(pending)});
    pending.clear();
  };
  while (std::getline(in, line)) {
    if (auto c = line.find('\\'); c != std::string::npos) line.erase(c);
    const std::string key = lower_case(trim(line));
    if (key.empty()) continue;
    Section next = section;
    if (key == "minimize" || key == "minimum" || key == "min") next = Section::Objective;
    else if (key == "subject to" || key == "such that" || key == "st" || key == "s.t.") next = Section::Constraints;
    else if (key == "bounds" || key == "bound") next = Section::Bounds;
    else if (key == "binaries" || key == "binary" || key == "bin") next = Section::Binaries;
    else if (key == "generals" || key == "general" || key == "gen") next = Section::Generals;
    else if (key == "end") next = Section::End;
    if (next != section || key == "end") {
      flush();
      section = next;
      continue;
    }
    if (key == "maximize" || key == "max") throw DataError("LP text: only minimization is supported");
    std::istringstream tokens(line);
    std::string tok;
    std::vector<std::string> toks;
    while (tokens >> tok) toks.push_back(tok);
    if (section == Section::Bounds || section == Section::Binaries || section == Section::Generals) {
      statements.push_back({section, std::move(toks)});
    } else {
      // A new "name:" label starts a new statement.
      if (!toks.empty() && toks.front().back() == ':') flush();
      for (auto& t : toks) pending.push_back(std::move(t));
    }
  }
  flush();

  auto parse_terms = [&](const std::vector<std::string>& toks, std::size_t& pos, double& constant) {
    std::vector<std::pair<std::size_t, double>> terms;
    double sign = 1.0;
    while (pos < toks.size() && !is_operator(toks[pos])) {
      const std::string& t = toks[pos++];
      if (t == "+") {
        sign = 1.0;
      } else if (t == "-") {
        sign = -1.0;
      } else if (is_number(t)) {
        const double a = sign * number(t);
        if (pos < toks.size() && !is_operator(toks[pos]) && toks[pos] != "+" && toks[pos] != "-" &&
            !is_number(toks[pos])) {
          terms.push_back({var(toks[pos++]), a});
        } else {
          constant += a;
        }
        sign = 1.0;
      } else {
        terms.push_back({var(t), sign});
        sign = 1.0;
      }
    }
    return terms;
  };

  for (auto& [sec, toks] : statements) {
    std::string name;
    std::size_t pos = 0;
    if (!toks.empty() && toks.front().back() == ':') {
      name = toks.front().substr(0, toks.front().size() - 1);
      pos = 1;
    }
    switch (sec) {
      case Section::Objective: {
        double constant = 0.0;
        for (const auto& [j, a] : parse_terms(toks, pos, constant)) lp.variables[j].cost += a;
        lp.objective_offset += constant;
        break;
      }
      case Section::Constraints: {
        double constant = 0.0;
        auto terms = parse_terms(toks, pos, constant);
        if (pos + 2 != toks.size()) throw DataError("LP text: malformed constraint '" + name + "'");
        const RowSense sense = sense_of(toks[pos]);
        const double rhs = number(toks[pos + 1]) - constant;
        lp.rows.push_back({name.empty() ? "r" + std::to_string(lp.rows.size()) : name, std::move(terms), sense, rhs});
        break;
      }
      case Section::Bounds: {
        if (toks.size() == 2 && lower_case(toks[1]) == "free") {
          auto& v = lp.variables[var(toks[0])];
          v.lower = -kInfinity;
          v.upper = kInfinity;
        } else if (toks.size() == 5 && is_operator(toks[1]) && is_operator(toks[3])) {
          auto& v = lp.variables[var(toks[2])];
          v.lower = number(toks[0]);
          v.upper = number(toks[4]);
        } else if (toks.size() == 3 && is_operator(toks[1])) {
          const bool var_first = !is_number(toks[0]);
          auto& v = lp.variables[var(var_first ? toks[0] : toks[2])];
          const double value = number(var_first ? toks[2] : toks[0]);
          RowSense s = sense_of(toks[1]);
          if (!var_first && s != RowSense::Equal)
            s = s == RowSense::LessEqual ? RowSense::GreaterEqual : RowSense::LessEqual;
          if (s == RowSense::Equal) {
            v.lower = v.upper = value;
          } else if (s == RowSense::LessEqual) {
            v.upper = value;
          } else {
            v.lower = value;
          }
        } else {
          throw DataError("LP text: malformed bound");
        }
        break;
      }
      case Section::Binaries:
        for (const auto& t : toks) {
          auto& v = lp.variables[var(t)];
          v.integer = true;
          v.lower = 0.0;
          v.upper = 1.0;
        }
        break;
      case Section::Generals:
        for (const auto& t : toks) lp.variables[var(t)].integer = true;
        break;
      case Section::None:
      case Section::End: throw DataError("LP text: content outside a section");
    }
  }
  return lp;
}

}  // namespace distill

#include "distill/transition_matrix.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "distill/error.hpp"

namespace distill {

namespace detail {
extern const std::string_view kTransitionMatrixCsv;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

}  // namespace

void TransitionMatrix::set(Tactic from, Tactic to, double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) throw ConfigError("transition weights must lie in [0,1]");
  w_[index_of(from)][index_of(to)] = weight;
}

double TransitionMatrix::max_transition(const TacticSet& from, const TacticSet& to) const noexcept {
  double best = 0.0;
  for (auto a : from.to_vector())
    for (auto b : to.to_vector()) best = std::max(best, (*this)(a, b));
  return best;
}

TransitionMatrix TransitionMatrix::from_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.size() != kTacticCount + 1) throw ConfigError("transition matrix needs a header and 12 rows");
  const auto& header = rows.front();
  if (header.size() != kTacticCount + 1) throw ConfigError("transition matrix header needs 13 cells");
  std::array<Tactic, kTacticCount> columns{};
  for (std::size_t c = 0; c < kTacticCount; ++c) {
    auto t = parse_tactic(header[c + 1]);
    if (!t) throw ConfigError("unknown tactic in header: " + header[c + 1]);
    columns[c] = *t;
  }
  TransitionMatrix m;
  std::array<bool, kTacticCount> seen{};
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != kTacticCount + 1) throw ConfigError("transition matrix row " + std::to_string(r) + " needs 13 cells");
    auto from = parse_tactic(row[0]);
    if (!from) throw ConfigError("unknown tactic in row: " + row[0]);
    if (seen[index_of(*from)]) throw ConfigError("duplicate transition row: " + row[0]);
    seen[index_of(*from)] = true;
    for (std::size_t c = 0; c < kTacticCount; ++c) {
      const auto& cell = row[c + 1];
      double value = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw ConfigError("bad transition weight '" + cell + "'");
      m.set(*from, columns[c], value);
    }
  }
  return m;
}

TransitionMatrix TransitionMatrix::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transition matrix " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_csv(buf.str());
}

std::string TransitionMatrix::to_csv() const {
  std::ostringstream out;
  out << "TACTIC";
  for (auto t : all_tactics()) out << ',' << tactic_name(t);
  out << '\n';
  for (auto from : all_tactics()) {
    out << tactic_name(from);
    for (auto to : all_tactics()) out << ',' << (*this)(from, to);
    out << '\n';
  }
  return out.str();
}

const TransitionMatrix& default_transition_matrix() {
  static const TransitionMatrix matrix = TransitionMatrix::from_csv(detail::kTransitionMatrixCsv);
  return matrix;
}

}  // namespace distill

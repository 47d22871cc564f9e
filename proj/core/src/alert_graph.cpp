#include "distill/alert_graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "distill/error.hpp"
#include "distill/keyvalue.hpp"
#include "distill/parallel.hpp"

namespace distill {

namespace {

// Kronecker delta over two sorted sets: 1 iff they intersect.
int sorted_overlap(const std::set<IpAddress>& a, const std::set<IpAddress>& b) {
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return 1;
    }
  }
  return 0;
}

int asset_match(const GeneralizedAlert& v, const GeneralizedAlert& w, const IpCorrelation& ip_corr) {
  if (!ip_corr) return sorted_overlap(v.assets, w.assets);
  int match = 0;
  for (const auto& a : v.assets)
    for (const auto& b : w.assets) {
      match = std::max(match, ip_corr(a, b));
      if (match >= 1) return match;
    }
  return match;
}

}  // namespace

double correlation(const GeneralizedAlert& v, const GeneralizedAlert& w, const TransitionMatrix& transitions,
                   const IpCorrelation& ip_corr) {
  const double t = transitions.max_transition(v.tactics, w.tactics);
  if (t == 0.0) return 0.0;
  return t * asset_match(v, w, ip_corr);
}

std::optional<std::size_t> AlertGraph::index_of(std::string_view id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const GeneralizedAlert& n, std::string_view key) { return n.id < key; });
  if (it == nodes.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes.begin());
}

Matrix AlertGraph::symmetric_weights() const {
  Matrix w(size(), std::vector<double>(size(), 0.0));
  for (const auto& e : edges) {
    w[e.from][e.to] = std::max(w[e.from][e.to], e.weight);
    w[e.to][e.from] = std::max(w[e.to][e.from], e.weight);
  }
  return w;
}

Matrix AlertGraph::laplacian() const {
  Matrix l = symmetric_weights();
  for (std::size_t i = 0; i < l.size(); ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < l.size(); ++j) {
      if (i == j) continue;
      degree += l[i][j];
      l[i][j] = -l[i][j];
    }
    l[i][i] = degree;
  }
  return l;
}

std::vector<std::size_t> AlertGraph::degrees() const {
  std::vector<std::vector<std::size_t>> adj(size());
  for (const auto& e : edges) {
    adj[e.from].push_back(e.to);
    adj[e.to].push_back(e.from);
  }
  std::vector<std::size_t> deg(size());
  for (std::size_t i = 0; i < size(); ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    deg[i] = static_cast<std::size_t>(std::unique(adj[i].begin(), adj[i].end()) - adj[i].begin());
  }
  return deg;
}

AlertGraph AlertGraph::induced(std::span<const std::size_t> members) const {
  AlertGraph sub;
  sub.threshold = threshold;
  std::vector<std::size_t> position(size(), SIZE_MAX);
  for (std::size_t i = 0; i < members.size(); ++i) {
    position[members[i]] = i;
    sub.nodes.push_back(nodes[members[i]]);
  }
  for (const auto& e : edges)
    if (position[e.from] != SIZE_MAX && position[e.to] != SIZE_MAX)
      sub.edges.push_back({position[e.from], position[e.to], e.weight});
  std::sort(sub.edges.begin(), sub.edges.end(),
            [](const GraphEdge& a, const GraphEdge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  return sub;
}

std::vector<std::vector<std::size_t>> AlertGraph::components() const {
  std::vector<std::size_t> parent(size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) {
    auto a = find(e.from), b = find(e.to);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::vector<std::size_t>> groups(size());
  for (std::size_t i = 0; i < size(); ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& g : groups)
    if (!g.empty()) out.push_back(std::move(g));
  return out;
}

AlertGraph build_graph(std::vector<GeneralizedAlert> alerts, const TransitionMatrix& transitions,
                       const GraphOptions& options) {
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) throw ConfigError("threshold must lie in (0,1)");
  AlertGraph graph;
  graph.threshold = options.threshold;
  graph.nodes = std::move(alerts);
  std::sort(graph.nodes.begin(), graph.nodes.end(),
            [](const GeneralizedAlert& a, const GeneralizedAlert& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < graph.nodes.size(); ++i)
    if (graph.nodes[i].id == graph.nodes[i - 1].id) throw DataError("duplicate generalized alert id " + graph.nodes[i].id);

  const auto& nodes = graph.nodes;
  const std::size_t n = nodes.size();
  const IpCorrelation& ip_corr = options.ip_corr;
  auto in_window = [&](const GeneralizedAlert& a, const GeneralizedAlert& b) {
    if (!options.time_window) return true;
    const auto gap = b.first_seen > a.first_seen ? b.first_seen - a.first_seen : a.first_seen - b.first_seen;
    return gap <= *options.time_window;
  };

  // Rows are independent; each worker fills the edges leaving node i.
  std::vector<std::vector<GraphEdge>> rows(n);
  parallel_for(n, options.jobs, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& a = nodes[i];
      const auto& b = nodes[j];
      if (a.first_seen > b.first_seen || !in_window(a, b)) continue;
      // The asset term is 0 or 1, so a weak tactic transition rules the pair out early.
      if (!(transitions.max_transition(a.tactics, b.tactics) > options.threshold)) continue;
      const double w = correlation(a, b, transitions, ip_corr);
      if (!(w > options.threshold)) continue;
      if (a.first_seen == b.first_seen && j < i) {
        // Symmetric weights carry no direction; the lower id keeps the edge.
        const double back = correlation(b, a, transitions, ip_corr);
        if (back > options.threshold && back == w) continue;
      }
      rows[i].push_back({i, j, w});
    }
  });
  for (auto& r : rows) std::move(r.begin(), r.end(), std::back_inserter(graph.edges));
  return graph;
}

std::string graph_to_tsv(const AlertGraph& graph) {
  std::ostringstream out;
  out << "# nodes: index, id, source, score, tactics, assets, first_seen, members\n";
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& v = graph.nodes[i];
    std::string assets;
    for (const auto& a : v.assets) assets += (assets.empty() ? "" : ",") + a.to_string();
    out << "node\t" << i << '\t' << v.id << '\t' << v.source << '\t' << format_real(v.score) << '\t'
        << v.tactics.to_string() << '\t' << assets << '\t' << format_timestamp(v.first_seen) << '\t'
        << v.members.size() << '\n';
  }
  out << "# edges: from id, to id, weight (threshold " << format_real(graph.threshold) << ")\n";
  for (const auto& e : graph.edges)
    out << "edge\t" << graph.nodes[e.from].id << '\t' << graph.nodes[e.to].id << '\t' << format_real(e.weight)
        << '\n';
  return out.str();
}

AlertGraph graph_from_tsv(std::string_view text, std::vector<GeneralizedAlert> nodes) {
  AlertGraph graph;
  graph.nodes = std::move(nodes);
  std::sort(graph.nodes.begin(), graph.nodes.end(),
            [](const GeneralizedAlert& a, const GeneralizedAlert& b) { return a.id < b.id; });
  std::size_t line_no = 0;
  std::size_t node_rows = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("(threshold ");
      if (pos != std::string::npos) {
        const auto end = line.find(')', pos);
        if (auto t = parse_real(line.substr(pos + 11, end - pos - 11))) graph.threshold = *t;
      }
      continue;
    }
    const auto cells = split(line, '\t');
    if (cells[0] == "node") {
      if (cells.size() < 3 || !graph.index_of(cells[2])) throw ParseError("unknown node in graph table", line_no);
      ++node_rows;
    } else if (cells[0] == "edge") {
      if (cells.size() != 4) throw ParseError("edge rows have 4 columns", line_no);
      auto from = graph.index_of(cells[1]);
      auto to = graph.index_of(cells[2]);
      auto w = parse_real(cells[3]);
      if (!from || !to || !w) throw ParseError("bad edge row", line_no);
      graph.edges.push_back({*from, *to, *w});
    } else {
      throw ParseError("unknown row type '" + cells[0] + "'", line_no);
    }
  }
  if (node_rows != graph.nodes.size())
    throw DataError("graph table lists " + std::to_string(node_rows) + " nodes, alert file has " +
                    std::to_string(graph.nodes.size()));
  std::sort(graph.edges.begin(), graph.edges.end(),
            [](const GraphEdge& a, const GraphEdge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  return graph;
}

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string values_of(const GeneralizedAlert& v, std::string_view name) {
  std::string out;
  for (const auto& a : v.attributes)
    if (a.name.find(name) != std::string::npos && a.value.kind() == ValueKind::Ip)
      out += (out.empty() ? "" : " ") + a.value.str();
  return out;
}

}  // namespace

std::string graph_to_dot(const AlertGraph& graph) {
  std::ostringstream out;
  out << "digraph alerts {\n  node [shape=box];\n";
  for (const auto& v : graph.nodes) {
    const std::string label = values_of(v, "src") + "\\n" + values_of(v, "dst") + "\\n" +
                              dot_escape(v.signature.empty() ? v.source : v.signature);
    out << "  \"" << dot_escape(v.id) << "\" [label=\"" << label << "\", score=" << format_real(v.score)
        << ", tactics=\"" << v.tactics.to_string() << "\"];\n";
  }
  for (const auto& e : graph.edges)
    out << "  \"" << dot_escape(graph.nodes[e.from].id) << "\" -> \"" << dot_escape(graph.nodes[e.to].id)
        << "\" [weight=" << format_real(e.weight) << "];\n";
  out << "}\n";
  return out.str();
}

}  // namespace distill

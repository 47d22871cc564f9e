#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "distill/alert.hpp"
#include "distill/alert_graph.hpp"
#include "distill/factor_graph.hpp"
#include "distill/ip.hpp"
#include "distill/time.hpp"

namespace fixtures {

using namespace distill;

inline IpAddress ip(const std::string& text) {
  auto parsed = IpAddress::parse(text);
  if (!parsed) throw std::runtime_error("bad ip in fixture: " + text);
  return *parsed;
}

inline Timestamp at_seconds(long long s) { return Timestamp{std::chrono::seconds{s}}; }

/// Raw alert with the EVE attribute order (dstIP, dstPort, srcIP, srcPort).
inline Alert raw_alert(std::string id, std::string source, const std::string& dst_ip, int dst_port,
                       const std::string& src_ip, int src_port, double score = 0.5, long long ts = 0,
                       TacticSet tactics = {Tactic::Discovery}) {
  Alert a;
  a.id = std::move(id);
  a.timestamp = at_seconds(ts);
  a.source = std::move(source);
  a.signature = "rule " + a.source;
  a.kind = SourceKind::Signature;
  a.attributes = {{"dstIP", AttributeValue::ip(ip(dst_ip))},
                  {"dstPort", AttributeValue::port(static_cast<std::uint16_t>(dst_port))},
                  {"srcIP", AttributeValue::ip(ip(src_ip))},
                  {"srcPort", AttributeValue::port(static_cast<std::uint16_t>(src_port))}};
  a.score = score;
  a.tactics = tactics;
  const auto net = NetworkConfig::private_ranges();
  for (const auto& name : {"dstIP", "srcIP"}) {
    auto v = find_attribute(a.attributes, name)->as_ip();
    if (v && net.is_internal(*v)) a.assets.insert(*v);
  }
  return a;
}

/// Generalized alert used as a graph node.
inline GeneralizedAlert node(std::string id, TacticSet tactics, std::vector<std::string> assets, long long ts,
                             double score = 0.5) {
  GeneralizedAlert g;
  g.id = std::move(id);
  g.source = "src-" + g.id;
  g.signature = "sig " + g.id;
  g.tactics = tactics;
  for (const auto& a : assets) g.assets.insert(ip(a));
  g.score = score;
  g.first_seen = g.last_seen = at_seconds(ts);
  g.members = {g.id};
  std::string first = assets.empty() ? "203.0.113.1" : assets.front();
  g.attributes = {{"dstIP", AttributeValue::ip(ip(first))}, {"srcIP", AttributeValue::ip(ip("203.0.113.9"))}};
  return g;
}

/// Random graph on n nodes: random tactics (1 or 2), one of a few shared
/// assets, random start times. Edges come from build_graph.
inline AlertGraph random_graph(std::mt19937_64& rng, std::size_t n, double threshold = 0.4) {
  static const std::vector<std::string> hosts{"10.0.0.1", "10.0.0.2", "10.0.0.3"};
  std::vector<GeneralizedAlert> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    TacticSet tactics{tactic_at(rng() % kTacticCount)};
    if (rng() % 3 == 0) tactics.insert(tactic_at(rng() % kTacticCount));
    std::vector<std::string> assets{hosts[rng() % hosts.size()]};
    if (rng() % 4 == 0) assets.push_back(hosts[rng() % hosts.size()]);
    char id[16];
    std::snprintf(id, sizeof id, "n%02zu", i);
    nodes.push_back(node(id, tactics, assets, static_cast<long long>(rng() % 50)));
  }
  GraphOptions options;
  options.threshold = threshold;
  return build_graph(std::move(nodes), default_transition_matrix(), options);
}

/// Factor graph over n tactics: a random spanning tree of pairwise factors
/// plus one unary factor per variable, all entries in [0.05, 1].
inline TacticFactorGraph random_tree_fg(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<std::size_t> pick(kTacticCount);
  for (std::size_t i = 0; i < kTacticCount; ++i) pick[i] = i;
  for (std::size_t i = kTacticCount - 1; i > 0; --i) std::swap(pick[i], pick[rng() % (i + 1)]);
  std::sort(pick.begin(), pick.begin() + static_cast<long>(n));
  TacticFactorGraph fg;
  for (std::size_t i = 0; i < n; ++i) fg.variables.push_back(tactic_at(pick[i]));
  for (std::size_t v = 0; v < n; ++v) {
    const double p = u(rng);
    fg.factors.push_back({Factor::Kind::Alert, "u" + std::to_string(v), {v}, {1.0 - p, p}});
  }
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t parent = rng() % v;
    fg.factors.push_back({Factor::Kind::Transition, "p" + std::to_string(v), {parent, v}, {u(rng), u(rng), u(rng), u(rng)}});
  }
  return fg;
}

/// Alerts over `tactics` distinct tactics (one or two each) with random scores
/// and start times, for incident-shaped factor graphs.
inline std::vector<GeneralizedAlert> random_incident_alerts(std::mt19937_64& rng, std::size_t tactics,
                                                            std::size_t alerts) {
  std::vector<std::size_t> pick(kTacticCount);
  for (std::size_t i = 0; i < kTacticCount; ++i) pick[i] = i;
  for (std::size_t i = kTacticCount - 1; i > 0; --i) std::swap(pick[i], pick[rng() % (i + 1)]);
  std::vector<GeneralizedAlert> out;
  for (std::size_t a = 0; a < std::max(alerts, tactics); ++a) {
    // the first `tactics` alerts make sure every chosen tactic appears
    TacticSet set{tactic_at(pick[a < tactics ? a : rng() % tactics])};
    if (rng() % 3 == 0) set.insert(tactic_at(pick[rng() % tactics]));
    char id[16];
    std::snprintf(id, sizeof id, "a%02zu", a);
    out.push_back(node(id, set, {"10.0.0.1"}, static_cast<long long>(rng() % 100),
                       0.05 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0));
  }
  return out;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("distill-test-" + tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures

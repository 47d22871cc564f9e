#include "distill/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <set>

#include "distill/error.hpp"
#include "distill/keyvalue.hpp"
#include "distill/time.hpp"
#include "json.hpp"

namespace distill {

namespace {

using namespace std::chrono;
using ordered_json = nlohmann::ordered_json;
using Rng = std::mt19937_64;

// mt19937_64 output is fixed by the standard; the distributions are not, so
// draws are reduced by hand to keep scenarios identical across toolchains.
std::size_t draw(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[draw(rng, i)]);
}

IpAddress ip(std::string_view text) { return *IpAddress::parse(text); }

IpAddress ip4(unsigned a, unsigned b, unsigned c, unsigned d) { return IpAddress::v4((a << 24) | (b << 16) | (c << 8) | d); }

struct Rule {
  int sid = 0;
  std::string signature;
  std::string category;
  int severity = 3;
  TacticSet tactics;
  std::string proto = "TCP";
};

struct Event {
  Timestamp ts;
  const Rule* rule = nullptr;
  IpAddress src, dst;
  std::optional<std::uint16_t> sport, dport;
};

class Builder {
 public:
  explicit Builder(std::uint64_t seed) : rng_(seed) {}

  Rng& rng() { return rng_; }

  const Rule& rule(int sid, std::string signature, std::string category, int severity, TacticSet tactics,
                   std::string proto = "TCP") {
    rules_.push_back(std::make_unique<Rule>(Rule{sid, std::move(signature), std::move(category), severity, tactics,
                                                 std::move(proto)}));
    return *rules_.back();
  }

  void add(Timestamp ts, const Rule& rule, IpAddress src, std::optional<std::uint16_t> sport, IpAddress dst,
           std::optional<std::uint16_t> dport) {
    events_.push_back({ts, &rule, src, dst, sport, dport});
  }

  std::uint16_t ephemeral() { return static_cast<std::uint16_t>(1024 + draw(rng_, 64512)); }

  // `n` distinct ephemeral ports, starting with `fixed`.
  std::vector<std::uint16_t> ports(std::size_t n, std::vector<std::uint16_t> fixed = {}) {
    std::set<std::uint16_t> seen(fixed.begin(), fixed.end());
    while (fixed.size() < n) {
      const auto p = ephemeral();
      if (seen.insert(p).second) fixed.push_back(p);
    }
    fixed.resize(n);
    return fixed;
  }

  Timestamp within(Timestamp start, minutes span) {
    const auto us = duration_cast<microseconds>(span).count();
    return start + microseconds{static_cast<long long>(draw(rng_, static_cast<std::size_t>(us)))};
  }

  // Public address never handed out before by this builder.
  IpAddress external() {
    static constexpr unsigned kFirst[] = {24, 61, 66, 80, 128, 150, 194, 203, 210, 212};
    for (;;) {
      const auto a = kFirst[draw(rng_, std::size(kFirst))];
      const auto addr = ip4(a, 1 + draw(rng_, 254), draw(rng_, 256), 1 + draw(rng_, 254));
      if (used_.insert(addr).second) return addr;
    }
  }
  void reserve(IpAddress addr) { used_.insert(addr); }

  std::vector<IpAddress> externals(std::size_t n) {
    std::vector<IpAddress> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(external());
    return out;
  }

  Scenario finish(const ScenarioOptions& options, NetworkConfig network, ScenarioTruth truth, Timestamp day);

 private:
  Rng rng_;
  std::vector<std::unique_ptr<Rule>> rules_;
  std::vector<Event> events_;
  std::set<IpAddress> used_;
};

std::string eve_line(const Event& e, std::size_t flow_id) {
  ordered_json doc;
  doc["timestamp"] = format_timestamp(e.ts);
  doc["flow_id"] = flow_id;
  doc["event_type"] = "alert";
  doc["src_ip"] = e.src.to_string();
  if (e.sport) doc["src_port"] = *e.sport;
  doc["dest_ip"] = e.dst.to_string();
  if (e.dport) doc["dest_port"] = *e.dport;
  doc["proto"] = e.rule->proto;
  doc["alert"] = {{"action", "allowed"},         {"gid", 1},
                  {"signature_id", e.rule->sid}, {"rev", 1},
                  {"signature", e.rule->signature}, {"category", e.rule->category},
                  {"severity", e.rule->severity}};
  return doc.dump();
}

std::string flow_line(Timestamp ts, std::size_t flow_id, IpAddress src, IpAddress dst, std::uint16_t sport) {
  ordered_json doc;
  doc["timestamp"] = format_timestamp(ts);
  doc["flow_id"] = flow_id;
  doc["event_type"] = "flow";
  doc["src_ip"] = src.to_string();
  doc["src_port"] = sport;
  doc["dest_ip"] = dst.to_string();
  doc["dest_port"] = 80;
  doc["proto"] = "TCP";
  doc["flow"] = {{"pkts_toserver", 4}, {"pkts_toclient", 3}, {"state", "closed"}};
  return doc.dump();
}

Scenario Builder::finish(const ScenarioOptions& options, NetworkConfig network, ScenarioTruth truth, Timestamp day) {
  Scenario out;
  out.config.network = std::move(network);
  for (const auto& r : rules_) out.config.tactics.by_source[std::to_string(r->sid)] = r->tactics;

  std::vector<std::pair<Timestamp, std::string>> lines;
  std::vector<std::size_t> order(events_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return events_[a].ts < events_[b].ts; });
  std::size_t flow_id = 1000000;
  for (auto i : order) lines.emplace_back(events_[i].ts, eve_line(events_[i], ++flow_id));
  const auto src = ip4(172, 16, 0, 1), dst = ip4(93, 184, 216, 34);
  for (std::size_t i = 0; i < options.flow_records; ++i) {
    const auto ts = within(day + hours{8}, minutes{600});
    lines.emplace_back(ts, flow_line(ts, ++flow_id, src, dst, ephemeral()));
  }
  std::stable_sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [ts, text] : lines) out.records.push_back(std::move(text));

  truth.alerts = events_.size();
  out.truth = std::move(truth);
  return out;
}

Timestamp make_day(int y, unsigned m, unsigned d) { return Timestamp{sys_days{year{y} / month{m} / day{d}}}; }

// Alert streams whose generalized form is known up front: `kept` values cycle
// so every combination appears; the other two attributes are drawn at random
// from pools wide enough that they are the ones the templating selects.
struct Stream {
  const Rule* rule = nullptr;
  std::size_t count = 0;
  Timestamp start;
  minutes span{600};
  std::vector<IpAddress> src, dst;
  std::vector<std::uint16_t> dport;  // empty: no ports at all
  bool src_kept = true;              // otherwise dst is kept
};

// Returns the number of generalized alerts the stream collapses to.
std::size_t emit(Builder& b, const Stream& s) {
  const bool ported = !s.dport.empty();
  for (std::size_t i = 0; i < s.count; ++i) {
    const auto ts = b.within(s.start, s.span);
    if (!ported) {
      b.add(ts, *s.rule, s.src[draw(b.rng(), s.src.size())], std::nullopt, s.dst[draw(b.rng(), s.dst.size())],
            std::nullopt);
      continue;
    }
    const auto port = s.dport[(i / (s.src_kept ? s.src.size() : s.dst.size())) % s.dport.size()];
    if (s.src_kept) {
      b.add(ts, *s.rule, s.src[i % s.src.size()], b.ephemeral(), s.dst[draw(b.rng(), s.dst.size())], port);
    } else {
      b.add(ts, *s.rule, s.src[draw(b.rng(), s.src.size())], b.ephemeral(), s.dst[i % s.dst.size()], port);
    }
  }
  if (!ported) return 1;
  return (s.src_kept ? s.src.size() : s.dst.size()) * s.dport.size();
}

std::vector<IpAddress> host_range(unsigned a, unsigned b, unsigned c, unsigned first, std::size_t n) {
  std::vector<IpAddress> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(ip4(a, b, c, first + static_cast<unsigned>(i)));
  return out;
}

namespace sig {
constexpr const char* kProbe = "GPL RPC portmap sadmind request UDP";
constexpr const char* kExploit = "GPL RPC sadmind query with root credentials attempt UDP";
constexpr const char* kBadLogin = "GPL TELNET Bad Login";
constexpr const char* kDownload = "ET POLICY Executable and linking format (ELF) file download";
}  // namespace sig

const IpAddress kAttacker = ip4(202, 77, 162, 213);
const IpAddress kSecondAttacker = ip4(195, 115, 218, 108);

// Probe, exploit and bad-login streams with the count profiles of the
// published template table. Returns the number of generalized alerts (5).
std::size_t sadmind_intrusion(Builder& b, const ScenarioOptions& o, Timestamp day, std::vector<IpAddress>& victims) {
  const auto& probe = b.rule(2101959, sig::kProbe, "Decode of an RPC Query", 2, {Tactic::Discovery}, "UDP");
  const auto& exploit = b.rule(2101911, sig::kExploit, "Attempted Administrator Privilege Gain", 1,
                               {Tactic::InitialAccess, Tactic::Execution}, "UDP");
  const auto& telnet = b.rule(2101251, sig::kBadLogin, "Potentially Bad Traffic", 2, {Tactic::CredentialAccess});

  // Portmap sweep: 450 alerts, dstIP and srcPort both peaking at 60.
  std::vector<IpAddress> probed = {ip("172.16.115.20"), ip("172.16.115.87"),  ip("172.16.112.10"),
                                   ip("172.16.112.50"), ip("172.16.115.234"), ip("172.16.112.149"),
                                   ip("172.16.112.194"), ip("172.16.112.207")};
  probed.resize(std::min(probed.size(), o.probed_hosts), IpAddress{});
  for (std::size_t i = probed.size(); i < o.probed_hosts; ++i) probed.push_back(ip4(172, 16, 115, 100 + unsigned(i)));
  const std::size_t total = 450, p = o.probed_hosts;
  std::vector<std::size_t> counts;
  if (p == 8) {
    counts = {60, 60, 60, 60, 60, 60, 60, 30};
  } else {
    for (std::size_t i = 0; i < p; ++i) counts.push_back(total / p + (i < total % p ? 1 : 0));
  }
  const auto sports = b.ports(p, {54790, 54793, 60540});
  std::vector<std::size_t> dst_idx, sport_idx;
  for (std::size_t i = 0; i < p; ++i) {
    dst_idx.insert(dst_idx.end(), counts[i], i);
    sport_idx.insert(sport_idx.end(), counts[i], i);
  }
  shuffle(dst_idx, b.rng());
  shuffle(sport_idx, b.rng());
  for (std::size_t i = 0; i < total; ++i)
    b.add(b.within(day + hours{9} + minutes{51}, minutes{4}), probe, kAttacker, sports[sport_idx[i]],
          probed[dst_idx[i]], 111);

  // Root-credential exploit: 70 alerts. dstIP peaks at 30, dstPort at 50,
  // 14 source ports used 5 times each.
  victims = {ip("172.16.115.20"), ip("172.16.112.10"), ip("172.16.112.50")};
  struct Cell {
    std::size_t victim;
    std::uint16_t port;
    std::size_t n;
  };
  const Cell cells[] = {{0, 32773, 20}, {0, 32774, 10}, {1, 32773, 15}, {1, 32774, 5}, {2, 32773, 15}, {2, 32774, 5}};
  auto exploit_ports = b.ports(14, {60251, 60542, 60569});
  std::vector<std::uint16_t> sport_list;
  for (auto port : exploit_ports) sport_list.insert(sport_list.end(), 5, port);
  shuffle(sport_list, b.rng());
  std::size_t k = 0;
  for (const auto& c : cells)
    for (std::size_t i = 0; i < c.n; ++i)
      b.add(b.within(day + hours{10}, minutes{20}), exploit, kAttacker, sport_list[k++], victims[c.victim], c.port);

  // Failed telnet logins seen server-side: 30 alerts, 6 client ports used 5
  // times, three internal servers at 10 each, the main attacker at 20.
  const IpAddress servers[] = {ip("172.16.113.50"), ip("172.16.115.20"), ip("172.16.112.10")};
  const std::size_t to_main[] = {6, 7, 7};
  auto client_ports = b.ports(6, {43886, 46956, 46986});
  std::vector<std::uint16_t> dport_list;
  for (auto port : client_ports) dport_list.insert(dport_list.end(), 5, port);
  shuffle(dport_list, b.rng());
  k = 0;
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t i = 0; i < 10; ++i)
      b.add(b.within(day + hours{10} + minutes{30}, minutes{10}), telnet, servers[s], 23,
            i < to_main[s] ? kAttacker : kSecondAttacker, dport_list[k++]);

  return 1 + 2 + 2;
}

Scenario darpa(const ScenarioOptions& o) {
  if (o.probed_hosts < 4 || o.probed_hosts > 64) throw ConfigError("probed hosts must be within [4, 64]");
  if (o.scan_hosts < 20 || o.scan_hosts > 200) throw ConfigError("scan hosts must be within [20, 200]");
  if (o.client_hosts < 20 || o.client_hosts > 200) throw ConfigError("client hosts must be within [20, 200]");

  Builder b(o.seed);
  b.reserve(kAttacker);
  b.reserve(kSecondAttacker);
  const auto day = make_day(2000, 3, 7);
  ScenarioTruth truth;
  truth.chain = {sig::kProbe, sig::kExploit, sig::kBadLogin, sig::kDownload};

  std::vector<IpAddress> victims;
  truth.templates += sadmind_intrusion(b, o, day, victims);

  // Trojan download onto each victim: collapses to a single generalized alert.
  const auto& download = b.rule(2019542, sig::kDownload, "Potential Corporate Privacy Violation", 1,
                                {Tactic::CommandAndControl});
  for (const auto& v : victims)
    for (int i = 0; i < 3; ++i)
      b.add(b.within(day + hours{10} + minutes{45}, minutes{5}), download, kAttacker, 80, v, b.ephemeral());
  truth.templates += 1;

  // Flood with spoofed sources: no internal address, so it stays unconnected.
  const auto& flood = b.rule(2100237, "GPL DDOS mstream handler to client", "Attempted Denial of Service", 2,
                             {Tactic::Impact}, "UDP");
  const auto target = ip("131.84.1.31");
  for (int i = 0; i < 500; ++i)
    b.add(b.within(day + hours{11} + minutes{27}, minutes{3}), flood, b.external(), b.ephemeral(), target, 6838);
  truth.templates += 1;

  // Background: Discovery-only scans against one pool, Command-and-Control
  // beacons from another; neither links to anything.
  const auto scanned = host_range(172, 16, 114, 1, o.scan_hosts);
  const auto clients = host_range(172, 16, 116, 1, o.client_hosts);
  const auto morning = day + hours{8};
  const TacticSet discovery{Tactic::Discovery}, c2{Tactic::CommandAndControl};
  auto scan = [&](int sid, const char* text, std::size_t n, std::size_t scanners, std::vector<std::uint16_t> dports) {
    const auto& r = b.rule(sid, text, "Attempted Information Leak", 3, discovery);
    truth.templates += emit(b, {&r, n, morning, minutes{600}, b.externals(scanners), scanned, std::move(dports), true});
  };
  scan(2001219, "ET SCAN Potential SSH Scan", 1350, 5, {22});
  scan(2010937, "ET SCAN Suspicious inbound to mySQL port 3306", 600, 3, {3306});
  scan(2002911, "ET SCAN Potential VNC Scan 5900-5920", 300, 1, {5900, 5901, 5902});
  scan(2101411, "GPL SNMP public access udp", 400, 2, {161});
  scan(2100538, "GPL NETBIOS SMB IPC$ unicode share access", 250, 4, {139});
  {
    const auto& r = b.rule(2100366, "GPL ICMP_INFO PING *NIX", "Misc activity", 3, discovery, "ICMP");
    truth.templates += emit(b, {&r, 800, morning, minutes{600}, b.externals(4), scanned, {}, true});
  }
  {
    const auto& r = b.rule(2101852, "GPL WEB_SERVER robots.txt access", "Access to a Potentially Vulnerable Web Application",
                           3, discovery);
    truth.templates += emit(b, {&r, 300, morning, minutes{600}, b.externals(50),
                                host_range(172, 16, 114, 200, 3), {80}, false});
  }
  auto beacon = [&](int sid, const char* text, std::size_t n, std::size_t servers, std::uint16_t port) {
    const auto& r = b.rule(sid, text, "Potentially Bad Traffic", 3, c2);
    truth.templates += emit(b, {&r, n, morning, minutes{600}, clients, b.externals(servers), {port}, false});
  };
  beacon(2027758, "ET DNS Query for .cc TLD", 800, 4, 53);
  beacon(2023883, "ET INFO HTTP Request to a *.top domain", 600, 5, 80);
  beacon(2013028, "ET POLICY curl User-Agent Outbound", 400, 3, 443);

  // Two small benign clusters that do link up: an admin pushing a tool over
  // SMB, and a workstation uploading after a suspicious download.
  {
    const auto admin = ip("172.16.113.84");
    const auto targets = host_range(172, 16, 113, 100, 6);
    const auto& smb = b.rule(2025701, "ET POLICY SMB Executable File Transfer", "Potential Corporate Privacy Violation",
                             2, {Tactic::LateralMovement});
    truth.templates += emit(b, {&smb, 60, day + hours{13}, minutes{10}, {admin}, targets, {445}, true});
    const auto& psexec = b.rule(2010781, "ET POLICY PsExec service created", "Potential Corporate Privacy Violation", 2,
                                {Tactic::Execution});
    truth.templates += emit(b, {&psexec, 30, day + hours{13} + minutes{20}, minutes{10}, {admin},
                                {targets.begin(), targets.begin() + 3}, {445}, true});
    const auto workstation = ip("172.16.117.20");
    const auto& fetch = b.rule(2018959, "ET POLICY PE EXE or DLL Windows file download HTTP",
                               "Potential Corporate Privacy Violation", 2, c2);
    const auto& upload = b.rule(2022657, "ET POLICY Possible data upload over HTTP", "Potentially Bad Traffic", 2,
                                {Tactic::Exfiltration});
    const auto server = b.external();
    for (int i = 0; i < 40; ++i)
      b.add(b.within(day + hours{15}, minutes{10}), fetch, workstation, b.ephemeral(), server, 80);
    for (int i = 0; i < 20; ++i)
      b.add(b.within(day + hours{15} + minutes{30}, minutes{10}), upload, workstation, b.ephemeral(), server, 80);
    truth.templates += 2;
  }

  truth.incidents = 3;
  NetworkConfig network;
  network.internal = {*Cidr::parse("172.16.0.0/16")};
  return b.finish(o, std::move(network), std::move(truth), day);
}

Scenario template_table(const ScenarioOptions& o) {
  ScenarioOptions fixed = o;
  fixed.probed_hosts = 8;
  Builder b(o.seed);
  b.reserve(kAttacker);
  b.reserve(kSecondAttacker);
  const auto day = make_day(2000, 3, 7);
  ScenarioTruth truth;
  truth.chain = {sig::kProbe, sig::kExploit, sig::kBadLogin};
  std::vector<IpAddress> victims;
  truth.templates = sadmind_intrusion(b, fixed, day, victims);
  truth.incidents = 1;
  NetworkConfig network;
  network.internal = {*Cidr::parse("172.16.0.0/16")};
  fixed.flow_records = 0;
  return b.finish(fixed, std::move(network), std::move(truth), day);
}

// Every group gets its own /24 inside 10.0.0.0/8 and its own external
// addresses in 45.g.role.0/24, so groups never merge or link.
Scenario enterprise(const ScenarioOptions& o) {
  if (o.groups == 0 || o.groups > 250) throw ConfigError("groups must be within [1, 250]");
  Builder b(o.seed);
  ScenarioTruth truth;
  const auto first_day = make_day(2019, 11, 1);

  const TacticSet discovery{Tactic::Discovery}, c2{Tactic::CommandAndControl};
  struct Scan {
    const Rule* rule;
    std::uint16_t port;
  };
  const Scan scans[] = {
      {&b.rule(2001219, "ET SCAN Potential SSH Scan", "Attempted Information Leak", 3, discovery), 22},
      {&b.rule(2001569, "ET SCAN Behavioral Unusual Port 445 traffic", "Potentially Bad Traffic", 3, discovery), 445},
      {&b.rule(2023753, "ET SCAN MS Terminal Server Traffic on Non-standard Port", "Attempted Information Leak", 3,
               discovery),
       3389},
      {&b.rule(2002910, "ET SCAN Potential VNC Scan 5800-5820", "Attempted Information Leak", 3, discovery), 5800},
      {&b.rule(2010937, "ET SCAN Suspicious inbound to mySQL port 3306", "Potentially Bad Traffic", 3, discovery), 3306},
      {&b.rule(2011716, "ET SCAN Sipvicious User-Agent Detected", "Attempted Information Leak", 3, discovery), 5060},
  };
  const Rule* beacons[] = {
      &b.rule(2027758, "ET DNS Query for .cc TLD", "Potentially Bad Traffic", 3, c2),
      &b.rule(2023883, "ET INFO HTTP Request to a *.top domain", "Potentially Bad Traffic", 3, c2),
      &b.rule(2013028, "ET POLICY curl User-Agent Outbound", "Attempted Information Leak", 3, c2),
  };
  const auto& rdp = b.rule(2027520, "ET EXPLOIT Possible BlueKeep RDP Exploitation Attempt", "Attempted Administrator Privilege Gain",
                           1, {Tactic::InitialAccess});
  const auto& cradle = b.rule(2029840, "ET ATTACK_RESPONSE PowerShell download cradle outbound",
                              "A Network Trojan was detected", 1, {Tactic::Execution});
  const auto& lateral = b.rule(2025709, "ET POLICY SMB Remote Service Creation", "Potential Corporate Privacy Violation",
                               2, {Tactic::LateralMovement});
  const auto& exfil = b.rule(2027865, "ET POLICY Large outbound TLS transfer", "Potentially Bad Traffic", 2,
                             {Tactic::Exfiltration});
  truth.chain = {rdp.signature, cradle.signature, lateral.signature, exfil.signature};

  for (std::size_t g = 0; g < o.groups; ++g) {
    const auto hi = static_cast<unsigned>(g / 250), lo = static_cast<unsigned>(g % 250);
    const auto gg = static_cast<unsigned>(g);
    const auto day = first_day + days{static_cast<int>(g % 30)};
    const auto victims = host_range(10, hi, lo, 10, 3);
    const auto targets = host_range(10, hi, lo, 20, 5);
    const auto servers = host_range(10, hi, lo, 100, 30);
    const auto clients = host_range(10, hi, lo, 150, 40);
    auto outside = [&](unsigned role, std::size_t n) { return host_range(45, gg, role, 1, n); };

    for (std::size_t s = 0; s < std::size(scans); ++s) {
      const std::size_t scanners = 1 + (g + s) % 2;
      truth.templates += emit(b, {scans[s].rule, 85 * scanners, day, minutes{1440},
                                  outside(static_cast<unsigned>(s), scanners), servers, {scans[s].port}, true});
    }
    const std::uint16_t beacon_ports[] = {53, 80, 443};
    for (std::size_t s = 0; s < std::size(beacons); ++s)
      truth.templates += emit(b, {beacons[s], 150, day, minutes{1440}, clients,
                                  outside(static_cast<unsigned>(10 + s), 2), {beacon_ports[s]}, false});

    const auto start = day + hours{9};
    truth.templates += emit(b, {&rdp, 20, start, minutes{30}, outside(20, 1), victims, {3389}, true});
    truth.templates += emit(b, {&cradle, 15, start + hours{1}, minutes{30}, victims, outside(21, 1), {443}, false});
    truth.templates += emit(b, {&lateral, 20, start + hours{2}, minutes{30}, {victims[0]}, targets, {445}, true});
    std::vector<IpAddress> staged = victims;
    staged.insert(staged.end(), targets.begin(), targets.end());
    truth.templates += emit(b, {&exfil, 10, start + hours{3}, minutes{30}, staged, outside(22, 1), {443}, false});
  }
  truth.incidents = o.groups;

  NetworkConfig network;
  network.internal = {*Cidr::parse("10.0.0.0/8")};
  return b.finish(o, std::move(network), std::move(truth), first_day);
}

}  // namespace

std::string_view scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Darpa: return "darpa";
    case ScenarioKind::Enterprise: return "enterprise";
    case ScenarioKind::TemplateTable: return "template-table";
  }
  return "darpa";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) {
  for (auto k : {ScenarioKind::Darpa, ScenarioKind::Enterprise, ScenarioKind::TemplateTable})
    if (scenario_kind_name(k) == text) return k;
  return std::nullopt;
}

Scenario generate_scenario(const ScenarioOptions& options) {
  switch (options.kind) {
    case ScenarioKind::Darpa: return darpa(options);
    case ScenarioKind::Enterprise: return enterprise(options);
    case ScenarioKind::TemplateTable: return template_table(options);
  }
  throw ConfigError("unknown scenario kind");
}

void write_scenario(const Scenario& scenario, const std::filesystem::path& dir) {
  std::string alerts;
  for (const auto& line : scenario.records) {
    alerts += line;
    alerts += '\n';
  }
  write_file((dir / "alerts.json").string(), alerts);
  scenario.config.save_dir(dir);
  std::string truth = "schema = 1\n";
  truth += "alerts = " + std::to_string(scenario.truth.alerts) + "\n";
  truth += "templates = " + std::to_string(scenario.truth.templates) + "\n";
  truth += "incidents = " + std::to_string(scenario.truth.incidents) + "\n";
  for (const auto& s : scenario.truth.chain) truth += "chain = " + s + "\n";
  write_file((dir / "truth.txt").string(), truth);
}

ScenarioTruth parse_truth(std::string_view text) {
  const auto doc = KeyValueDocument::parse(text, "truth.txt");
  ScenarioTruth truth;
  for (const auto& e : doc.entries) {
    auto count = [&]() -> std::size_t {
      auto v = parse_real(e.value);
      if (!v || *v < 0) throw ParseError("truth.txt: expected a count for '" + e.key + "'", e.line);
      return static_cast<std::size_t>(*v);
    };
    if (e.key == "alerts") {
      truth.alerts = count();
    } else if (e.key == "templates") {
      truth.templates = count();
    } else if (e.key == "incidents") {
      truth.incidents = count();
    } else if (e.key == "chain") {
      truth.chain.push_back(e.value);
    } else {
      throw ParseError("truth.txt: unknown key '" + e.key + "'", e.line);
    }
  }
  return truth;
}

}  // namespace distill

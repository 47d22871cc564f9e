#include "distill/codec.hpp"

#include <sstream>

#include "distill/error.hpp"
#include "distill/keyvalue.hpp"
#include "json.hpp"

namespace distill {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json attributes_json(const AttributeList& attributes) {
  ordered_json out = ordered_json::array();
  for (const auto& a : attributes)
    out.push_back({{"name", a.name},
                   {"kind", std::string(value_kind_name(a.value.kind()))},
                   {"value", a.value.str()},
                   {"level", a.value.level()}});
  return out;
}

AttributeList attributes_from(const json& arr) {
  if (!arr.is_array()) throw FieldError("attributes", "expected an array");
  AttributeList out;
  for (const auto& a : arr) {
    const auto kind = parse_value_kind(a.at("kind").get<std::string>());
    if (!kind) throw FieldError("attributes.kind", "unknown kind");
    auto value = AttributeValue::decode(*kind, a.at("value").get<std::string>(), a.value("level", 0));
    if (!value) throw FieldError("attributes.value", "cannot decode '" + a.at("value").get<std::string>() + "'");
    out.push_back({a.at("name").get<std::string>(), std::move(*value)});
  }
  return out;
}

ordered_json tactics_json(const TacticSet& tactics) {
  ordered_json out = ordered_json::array();
  for (auto t : tactics.to_vector()) out.push_back(std::string(tactic_name(t)));
  return out;
}

TacticSet tactics_from(const json& arr) {
  TacticSet out;
  for (const auto& t : arr) {
    auto tactic = parse_tactic(t.get<std::string>());
    if (!tactic) throw FieldError("tactics", "unknown tactic '" + t.get<std::string>() + "'");
    out.insert(*tactic);
  }
  return out;
}

ordered_json assets_json(const std::set<IpAddress>& assets) {
  ordered_json out = ordered_json::array();
  for (const auto& a : assets) out.push_back(a.to_string());
  return out;
}

std::set<IpAddress> assets_from(const json& arr) {
  std::set<IpAddress> out;
  for (const auto& a : arr) {
    auto ip = IpAddress::parse(a.get<std::string>());
    if (!ip) throw FieldError("assets", "invalid IP '" + a.get<std::string>() + "'");
    out.insert(*ip);
  }
  return out;
}

Timestamp time_from(const json& v, const char* field) {
  auto ts = parse_timestamp(v.get<std::string>());
  if (!ts) throw FieldError(field, "invalid timestamp");
  return *ts;
}

SourceKind kind_from(const json& v) {
  auto kind = parse_source_kind(v.get<std::string>());
  if (!kind) throw FieldError("kind", "unknown source kind");
  return *kind;
}

ordered_json generalized_object(const GeneralizedAlert& g) {
  return ordered_json{{"id", g.id},
                      {"source", g.source},
                      {"signature", g.signature},
                      {"kind", std::string(source_kind_name(g.kind))},
                      {"attributes", attributes_json(g.attributes)},
                      {"score", g.score},
                      {"members", g.members},
                      {"first_seen", format_timestamp(g.first_seen)},
                      {"last_seen", format_timestamp(g.last_seen)},
                      {"tactics", tactics_json(g.tactics)},
                      {"assets", assets_json(g.assets)}};
}

GeneralizedAlert generalized_from(const json& doc) {
  GeneralizedAlert g;
  g.id = doc.at("id").get<std::string>();
  g.source = doc.at("source").get<std::string>();
  g.signature = doc.value("signature", "");
  g.kind = kind_from(doc.at("kind"));
  g.attributes = attributes_from(doc.at("attributes"));
  g.score = doc.at("score").get<double>();
  g.members = doc.at("members").get<std::vector<std::string>>();
  g.first_seen = time_from(doc.at("first_seen"), "first_seen");
  g.last_seen = time_from(doc.at("last_seen"), "last_seen");
  g.tactics = tactics_from(doc.at("tactics"));
  g.assets = assets_from(doc.at("assets"));
  return g;
}

json parse_doc(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
}

template <class T, class F>
std::vector<T> read_lines(std::string_view text, F&& parse) {
  std::vector<T> out;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const auto line = text.substr(start, end - start);
    start = end + 1;
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse(line));
    } catch (const DataError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace

std::string alert_to_json(const Alert& a) {
  ordered_json doc{{"id", a.id},
                   {"timestamp", format_timestamp(a.timestamp)},
                   {"source", a.source},
                   {"signature", a.signature},
                   {"kind", std::string(source_kind_name(a.kind))},
                   {"attributes", attributes_json(a.attributes)},
                   {"score", a.score},
                   {"tactics", tactics_json(a.tactics)},
                   {"assets", assets_json(a.assets)}};
  return doc.dump();
}

Alert alert_from_json(std::string_view text) {
  const json doc = parse_doc(text);
  return guarded([&] {
    Alert a;
    a.id = doc.at("id").get<std::string>();
    a.timestamp = time_from(doc.at("timestamp"), "timestamp");
    a.source = doc.at("source").get<std::string>();
    a.signature = doc.value("signature", "");
    a.kind = kind_from(doc.at("kind"));
    a.attributes = attributes_from(doc.at("attributes"));
    a.score = doc.at("score").get<double>();
    a.tactics = tactics_from(doc.at("tactics"));
    a.assets = assets_from(doc.at("assets"));
    validate(a);
    return a;
  });
}

std::string generalized_to_json(const GeneralizedAlert& g) { return generalized_object(g).dump(); }

GeneralizedAlert generalized_from_json(std::string_view text) {
  const json doc = parse_doc(text);
  return guarded([&] { return generalized_from(doc); });
}

std::string alerts_to_jsonl(const std::vector<Alert>& alerts) {
  std::string out;
  for (const auto& a : alerts) out += alert_to_json(a) + "\n";
  return out;
}

std::vector<Alert> alerts_from_jsonl(std::string_view text) {
  return read_lines<Alert>(text, [](std::string_view l) { return alert_from_json(l); });
}

std::string generalized_to_jsonl(const std::vector<GeneralizedAlert>& alerts) {
  std::string out;
  for (const auto& a : alerts) out += generalized_to_json(a) + "\n";
  return out;
}

std::vector<GeneralizedAlert> generalized_from_jsonl(std::string_view text) {
  return read_lines<GeneralizedAlert>(text, [](std::string_view l) { return generalized_from_json(l); });
}

namespace {

ordered_json scores_object(const TacticScores& s) {
  ordered_json arr = ordered_json::array();
  for (const auto& [t, p] : s.marginals)
    arr.push_back({{"tactic", std::string(tactic_name(t))}, {"code", std::string(tactic_code(t))}, {"score", p}});
  return arr;
}

}  // namespace

std::string scores_to_json(const TacticScores& scores, int indent) {
  ordered_json doc{{"scores", scores_object(scores)},
                   {"converged", scores.converged},
                   {"iterations", scores.iterations},
                   {"top_score", scores.max_score()}};
  return doc.dump(indent);
}

std::string incident_to_json(const Incident& inc, int indent) {
  ordered_json nodes = ordered_json::array();
  for (const auto& v : inc.nodes) {
    ordered_json node = generalized_object(v);
    ordered_json src = ordered_json::array(), dst = ordered_json::array();
    for (const auto& a : v.attributes) {
      if (a.value.kind() != ValueKind::Ip) continue;
      if (a.name.rfind("src", 0) == 0) src.push_back(a.value.str());
      if (a.name.rfind("dst", 0) == 0 || a.name.rfind("dest", 0) == 0) dst.push_back(a.value.str());
    }
    node["src_ips"] = src;
    node["dst_ips"] = dst;
    nodes.push_back(std::move(node));
  }
  ordered_json edges = ordered_json::array();
  for (const auto& e : inc.edges)
    edges.push_back({{"from", inc.nodes[e.from].id}, {"to", inc.nodes[e.to].id}, {"weight", e.weight}});
  ordered_json evidence_tactics = ordered_json::object();
  for (const auto& [t, s] : inc.evidence) evidence_tactics[std::string(tactic_name(t))] = std::string(tactic_state_name(s));
  ordered_json doc{{"id", inc.id},
                   {"top_score", inc.top_score()},
                   {"node_count", inc.nodes.size()},
                   {"edge_count", inc.edges.size()},
                   {"tactics", tactics_json(inc.tactics)},
                   {"assets", assets_json(inc.assets)},
                   {"scores", scores_object(inc.scores)},
                   {"inference", {{"converged", inc.scores.converged}, {"iterations", inc.scores.iterations}}},
                   {"evidence",
                    {{"tactics", evidence_tactics},
                     {"alerts", std::vector<std::string>(inc.inactive_alerts.begin(), inc.inactive_alerts.end())}}},
                   {"nodes", nodes},
                   {"edges", edges}};
  return doc.dump(indent);
}

Incident incident_from_json(std::string_view text) {
  const json doc = parse_doc(text);
  return guarded([&] {
    Incident inc;
    inc.id = doc.at("id").get<std::string>();
    for (const auto& n : doc.at("nodes")) inc.nodes.push_back(generalized_from(n));
    auto index = [&](const std::string& id) {
      for (std::size_t i = 0; i < inc.nodes.size(); ++i)
        if (inc.nodes[i].id == id) return i;
      throw FieldError("edges", "unknown node id '" + id + "'");
    };
    for (const auto& e : doc.at("edges"))
      inc.edges.push_back({index(e.at("from").get<std::string>()), index(e.at("to").get<std::string>()),
                           e.at("weight").get<double>()});
    inc.tactics = tactics_from(doc.at("tactics"));
    inc.assets = assets_from(doc.at("assets"));
    for (const auto& s : doc.at("scores")) {
      auto t = parse_tactic(s.at("tactic").get<std::string>());
      if (!t) throw FieldError("scores", "unknown tactic");
      inc.scores.marginals[*t] = s.at("score").get<double>();
    }
    inc.scores.converged = doc.at("inference").at("converged").get<bool>();
    inc.scores.iterations = doc.at("inference").at("iterations").get<std::size_t>();
    for (const auto& [name, state] : doc.at("evidence").at("tactics").items()) {
      auto t = parse_tactic(name);
      auto s = parse_tactic_state(state.get<std::string>());
      if (!t || !s) throw FieldError("evidence", "invalid entry '" + name + "'");
      inc.evidence[*t] = *s;
    }
    for (const auto& a : doc.at("evidence").at("alerts")) inc.inactive_alerts.insert(a.get<std::string>());
    return inc;
  });
}

std::string incident_index_json(const std::vector<Incident>& incidents, int indent) {
  ordered_json arr = ordered_json::array();
  for (const auto& inc : incidents)
    arr.push_back({{"id", inc.id},
                   {"tactic_count", inc.tactics.size()},
                   {"top_score", inc.top_score()},
                   {"node_count", inc.nodes.size()}});
  return ordered_json{{"incidents", arr}}.dump(indent);
}

std::string partition_to_text(const IncidentPartition& partition, const AlertGraph& graph) {
  std::ostringstream out;
  out << "# Partition columns as generalized alert ids. Diagnostics are comments.\n";
  out << "schema = 1\n";
  out << "status = " << partition_status_name(partition.status) << "\n";
  out << "objective = " << format_real(partition.objective) << "\n";
  out << "lower_bound = " << format_real(partition.lower_bound) << "\n";
  for (std::size_t c = 0; c < partition.columns.size(); ++c) {
    if (c < partition.diagnostics.size()) {
      const auto& d = partition.diagnostics[c];
      out << "# column " << c << ": size " << d.size << ", cut " << format_real(d.cut) << ", assets " << d.assets
          << ", missing tactics " << d.missing.size() << "\n";
    }
    out << "column " << c << " =";
    for (std::size_t q = 0; q < partition.columns[c].size(); ++q)
      out << (q ? ", " : " ") << graph.nodes[partition.columns[c][q]].id;
    out << "\n";
  }
  return out.str();
}

IncidentPartition partition_from_text(std::string_view text, const AlertGraph& graph) {
  IncidentPartition p;
  for (const auto& e : KeyValueDocument::parse(text, "partition.txt").entries) {
    if (e.key == "status") {
      if (e.value == "optimal") p.status = PartitionStatus::Optimal;
      else if (e.value == "relaxed-rounded") p.status = PartitionStatus::RelaxedRounded;
      else if (e.value == "heuristic") p.status = PartitionStatus::Heuristic;
      else throw ParseError("unknown status '" + e.value + "'", e.line);
    } else if (e.key == "objective" || e.key == "lower_bound") {
      auto v = parse_real(e.value);
      if (!v) throw ParseError("expected a number", e.line);
      (e.key == "objective" ? p.objective : p.lower_bound) = *v;
    } else if (e.key.rfind("column ", 0) == 0) {
      std::vector<std::size_t> column;
      if (!e.value.empty())
        for (const auto& id : split(e.value, ',')) {
          auto idx = graph.index_of(id);
          if (!idx) throw ParseError("unknown alert id '" + id + "'", e.line);
          column.push_back(*idx);
        }
      p.columns.push_back(std::move(column));
    } else {
      throw ParseError("unknown key '" + e.key + "'", e.line);
    }
  }
  describe(p, graph);
  return p;
}

}  // namespace distill

#include "distill/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "distill/error.hpp"
#include "distill/keyvalue.hpp"
#include "distill/parallel.hpp"
#include "json.hpp"

namespace distill {

using nlohmann::json;

namespace {

// "source 2100585" -> ("source", "2100585")
std::pair<std::string, std::string> split_key(const std::string& key) {
  const auto space = key.find(' ');
  if (space == std::string::npos) return {key, {}};
  return {key.substr(0, space), trim(key.substr(space + 1))};
}

double parse_unit_real(const std::string& text, const std::string& what, std::size_t line) {
  auto parsed = parse_real(text);
  if (!parsed) throw ParseError(what + ": '" + text + "' is not a number", line);
  const double value = *parsed;
  if (!(value >= 0.0 && value <= 1.0)) throw ConfigError(what + " must lie in [0,1], got " + text);
  return value;
}

bool parse_switch(const std::string& text, std::size_t line) {
  if (text == "on" || text == "true" || text == "1") return true;
  if (text == "off" || text == "false" || text == "0") return false;
  throw ParseError("expected on/off, got '" + text + "'", line);
}

bool name_mentions_port(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower.find("port") != std::string::npos;
}

json parse_json_line(std::string_view line, const RecordContext& ctx) {
  try {
    json doc = json::parse(line);
    if (!doc.is_object()) throw ParseError("record is not a JSON object", ctx.line);
    return doc;
  } catch (const json::exception& e) {
    // parse_error, and out_of_range for numbers that overflow a double
    throw ParseError(std::string("malformed record: ") + e.what(), ctx.line);
  }
}

const json& require(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end() || it->is_null()) throw FieldError(field, "missing");
  return *it;
}

std::string require_string(const json& doc, const char* field) {
  const json& v = require(doc, field);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw FieldError(field, "expected a string");
}

Timestamp require_timestamp(const json& doc, const char* field) {
  const json& v = require(doc, field);
  std::optional<Timestamp> ts;
  if (v.is_string()) {
    ts = parse_timestamp(v.get<std::string>());
  } else if (v.is_number()) {
    ts = parse_timestamp(format_real(v.get<double>()));
  }
  if (!ts) throw FieldError(field, "not a valid timestamp");
  return *ts;
}

double require_unit(const json& v, const char* field) {
  if (!v.is_number()) throw FieldError(field, "expected a number");
  const double x = v.get<double>();
  if (!(x >= 0.0 && x <= 1.0)) throw FieldError(field, "out of range [0,1]");
  return x;
}

std::string default_id(const RecordContext& ctx) { return ctx.shard + ":" + std::to_string(ctx.line); }

TacticSet resolve_tactics(const Alert& alert, const IngestConfig& config) {
  if (auto mapped = config.tactics.lookup(alert.source, alert.kind)) return *mapped;
  throw RejectError("no tactic mapping for source '" + alert.source + "' (kind " +
                    std::string(source_kind_name(alert.kind)) + ")");
}

void finish(Alert& alert, const IngestConfig& config) {
  alert.assets = derive_assets(alert, config.network);
  validate(alert);
}

AttributeValue typed_value(const std::string& name, const json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) {
    const long long n = v.get<long long>();
    if (name_mentions_port(name)) {
      if (n < 0 || n > 65535) throw FieldError("attributes." + name, "port out of range");
      return AttributeValue::port(static_cast<std::uint16_t>(n));
    }
    return AttributeValue::text(std::to_string(n));
  }
  if (v.is_number()) return AttributeValue::text(format_real(v.get<double>()));
  if (v.is_boolean()) return AttributeValue::text(v.get<bool>() ? "true" : "false");
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (auto ip = IpAddress::parse(s)) return AttributeValue::ip(*ip);
    if (name_mentions_port(name))
      if (auto port = AttributeValue::decode(ValueKind::Port, s, 0)) return *port;
    return AttributeValue::text(s);
  }
  throw FieldError("attributes." + name, "expected a scalar value");
}

}  // namespace

std::optional<TacticSet> TacticMappingConfig::lookup(const std::string& source, SourceKind kind) const {
  if (auto it = by_source.find(source); it != by_source.end()) return it->second;
  if (auto it = by_kind.find(kind); it != by_kind.end()) return it->second;
  return std::nullopt;
}

TacticMappingConfig TacticMappingConfig::parse(std::string_view text, std::string_view name) {
  TacticMappingConfig config;
  for (const auto& entry : KeyValueDocument::parse(text, name).entries) {
    auto [head, id] = split_key(entry.key);
    TacticSet tactics;
    try {
      tactics = parse_tactic_list(entry.value);
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), entry.line);
    }
    if (tactics.empty()) throw ParseError("empty tactic list", entry.line);
    if (head == "source" && !id.empty()) {
      config.by_source[id] = tactics;
    } else if (head == "kind") {
      auto kind = parse_source_kind(id);
      if (!kind) throw ParseError("unknown source kind '" + id + "'", entry.line);
      config.by_kind[*kind] = tactics;
    } else {
      throw ParseError("expected 'source <id>' or 'kind <kind>', got '" + entry.key + "'", entry.line);
    }
  }
  return config;
}

std::string TacticMappingConfig::serialize() const {
  std::string out = "schema = 1\n";
  for (const auto& [kind, tactics] : by_kind)
    out += "kind " + std::string(source_kind_name(kind)) + " = " + tactics.to_string() + "\n";
  for (const auto& [source, tactics] : by_source) out += "source " + source + " = " + tactics.to_string() + "\n";
  return out;
}

std::optional<double> ScoreMappingConfig::score_for_severity(int severity) const {
  if (auto it = severity_to_score.find(severity); it != severity_to_score.end()) return it->second;
  return std::nullopt;
}

ScoreMappingConfig ScoreMappingConfig::parse(std::string_view text, std::string_view name) {
  ScoreMappingConfig config;
  bool replaced = false;
  for (const auto& entry : KeyValueDocument::parse(text, name).entries) {
    auto [head, arg] = split_key(entry.key);
    if (head == "severity") {
      int severity = 0;
      try {
        severity = std::stoi(arg);
      } catch (const std::exception&) {
        throw ParseError("severity must be an integer, got '" + arg + "'", entry.line);
      }
      // A file that lists severities replaces the built-in table entirely.
      if (!replaced) config.severity_to_score.clear();
      replaced = true;
      config.severity_to_score[severity] = parse_unit_real(entry.value, "severity score", entry.line);
    } else if (head == "p_value_mode" && arg.empty()) {
      config.p_value_mode = parse_switch(entry.value, entry.line);
    } else {
      throw ParseError("unknown key '" + entry.key + "'", entry.line);
    }
  }
  return config;
}

std::string ScoreMappingConfig::serialize() const {
  std::string out = "schema = 1\n";
  out += std::string("p_value_mode = ") + (p_value_mode ? "on" : "off") + "\n";
  for (const auto& [severity, score] : severity_to_score)
    out += "severity " + std::to_string(severity) + " = " + format_real(score) + "\n";
  return out;
}

NetworkConfig normalize(NetworkConfig network) {
  auto& ranges = network.internal;
  std::sort(ranges.begin(), ranges.end(), [](const Cidr& a, const Cidr& b) {
    if (a.network().is_v4() != b.network().is_v4()) return a.network().is_v4();
    if (a.prefix() != b.prefix()) return a.prefix() < b.prefix();
    return a.network() < b.network();
  });
  std::vector<Cidr> kept;
  for (const auto& c : ranges) {
    const bool nested = std::any_of(kept.begin(), kept.end(), [&](const Cidr& k) {
      return k.network().is_v4() == c.network().is_v4() && k.contains(c.network());
    });
    if (!nested) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  ranges = std::move(kept);
  return network;
}

NetworkConfig parse_network_config(std::string_view text, std::string_view name) {
  NetworkConfig network;
  for (const auto& entry : KeyValueDocument::parse(text, name).entries) {
    if (entry.key != "internal") throw ParseError("unknown key '" + entry.key + "'", entry.line);
    auto cidr = Cidr::parse(entry.value);
    if (!cidr) throw ParseError("invalid CIDR '" + entry.value + "'", entry.line);
    network.internal.push_back(*cidr);
  }
  return normalize(std::move(network));
}

std::string serialize_network_config(const NetworkConfig& network) {
  std::string out = "schema = 1\n";
  for (const auto& c : network.internal) out += "internal = " + c.to_string() + "\n";
  return out;
}

IngestConfig IngestConfig::load_dir(const std::filesystem::path& dir) {
  IngestConfig config;
  auto read_if = [&](const char* file, auto&& apply) {
    const auto path = dir / file;
    if (std::filesystem::exists(path)) apply(read_file(path.string()), path.string());
  };
  read_if("tactics.map", [&](const std::string& text, const std::string& name) {
    config.tactics = TacticMappingConfig::parse(text, name);
  });
  read_if("scores.map", [&](const std::string& text, const std::string& name) {
    config.scores = ScoreMappingConfig::parse(text, name);
  });
  read_if("network.conf", [&](const std::string& text, const std::string& name) {
    config.network = parse_network_config(text, name);
  });
  return config;
}

void IngestConfig::save_dir(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* file, const std::string& text) { write_file((dir / file).string(), text); };
  write("tactics.map", tactics.serialize());
  write("scores.map", scores.serialize());
  write("network.conf", serialize_network_config(network));
}

std::set<IpAddress> derive_assets(const Alert& alert, const NetworkConfig& network) {
  std::set<IpAddress> assets;
  for (const auto& a : alert.attributes)
    if (auto ip = a.value.as_ip(); ip && network.is_internal(*ip)) assets.insert(*ip);
  return assets;
}

std::optional<Alert> parse_eve_record(std::string_view line, const RecordContext& ctx, const IngestConfig& config) {
  const json doc = parse_json_line(line, ctx);
  if (require_string(doc, "event_type") != "alert") return std::nullopt;
  const json& body = require(doc, "alert");
  if (!body.is_object()) throw FieldError("alert", "expected an object");

  Alert alert;
  alert.id = doc.contains("id") ? require_string(doc, "id") : default_id(ctx);
  alert.timestamp = require_timestamp(doc, "timestamp");
  alert.kind = SourceKind::Signature;
  alert.source = require_string(body, "signature_id");
  if (auto it = body.find("signature"); it != body.end() && it->is_string()) alert.signature = it->get<std::string>();

  auto ip_field = [&](const char* field, const char* name) {
    const auto text = require_string(doc, field);
    auto ip = IpAddress::parse(text);
    if (!ip) throw FieldError(field, "invalid IP address '" + text + "'");
    alert.attributes.push_back({name, AttributeValue::ip(*ip)});
  };
  auto port_field = [&](const char* field, const char* name) {
    auto it = doc.find(field);
    if (it == doc.end()) return;  // ICMP and friends carry no ports
    if (!it->is_number_integer() || it->get<long long>() < 0 || it->get<long long>() > 65535)
      throw FieldError(field, "invalid port");
    alert.attributes.push_back({name, AttributeValue::port(static_cast<std::uint16_t>(it->get<long long>()))});
  };
  ip_field("dest_ip", "dstIP");
  port_field("dest_port", "dstPort");
  ip_field("src_ip", "srcIP");
  port_field("src_port", "srcPort");

  const json& severity = require(body, "severity");
  if (!severity.is_number_integer()) throw FieldError("alert.severity", "expected an integer");
  auto score = config.scores.score_for_severity(severity.get<int>());
  if (!score) throw RejectError("no score mapping for severity " + std::to_string(severity.get<int>()));
  alert.score = *score;

  alert.tactics = resolve_tactics(alert, config);
  finish(alert, config);
  return alert;
}

Alert parse_generic_record(std::string_view line, const RecordContext& ctx, const IngestConfig& config) {
  const json doc = parse_json_line(line, ctx);

  Alert alert;
  alert.id = doc.contains("id") ? require_string(doc, "id") : default_id(ctx);
  alert.timestamp = require_timestamp(doc, "timestamp");
  alert.source = require_string(doc, "source");
  alert.kind = SourceKind::Custom;
  if (auto it = doc.find("kind"); it != doc.end()) {
    auto kind = it->is_string() ? parse_source_kind(it->get<std::string>()) : std::nullopt;
    if (!kind) throw FieldError("kind", "expected signature, anomaly or custom");
    alert.kind = *kind;
  }
  if (auto it = doc.find("signature"); it != doc.end() && it->is_string()) alert.signature = it->get<std::string>();

  const json& attributes = require(doc, "attributes");
  if (!attributes.is_object()) throw FieldError("attributes", "expected an object");
  // nlohmann::json objects iterate in key order, which becomes the schema order.
  for (const auto& [name, value] : attributes.items()) alert.attributes.push_back({name, typed_value(name, value)});

  const auto score = doc.find("score");
  const auto p_value = doc.find("p_value");
  if (score != doc.end() && !score->is_null()) {
    alert.score = require_unit(*score, "score");
  } else if (p_value != doc.end() && !p_value->is_null()) {
    const double p = require_unit(*p_value, "p_value");
    if (!config.scores.p_value_mode) throw FieldError("p_value", "given but p_value_mode is off");
    alert.score = 1.0 - p;
  } else {
    throw FieldError("score", "either score or p_value is required");
  }

  if (auto it = doc.find("tactics"); it != doc.end() && !it->is_null()) {
    auto add = [&](const std::string& name) {
      auto t = parse_tactic(name);
      if (!t) throw RejectError("unknown tactic '" + name + "'");
      alert.tactics.insert(*t);
    };
    if (it->is_array()) {
      for (const auto& t : *it) {
        if (!t.is_string()) throw FieldError("tactics", "expected tactic names");
        add(t.get<std::string>());
      }
    } else if (it->is_string()) {
      for (const auto& t : split(it->get<std::string>(), ',')) add(trim(t));
    } else {
      throw FieldError("tactics", "expected a list of tactic names");
    }
  }
  if (alert.tactics.empty()) alert.tactics = resolve_tactics(alert, config);
  finish(alert, config);
  return alert;
}

std::optional<Alert> parse_record(std::string_view line, const RecordContext& ctx, const IngestConfig& config) {
  // Cheap dialect sniff; both parsers re-validate the full record.
  if (line.find("\"event_type\"") != std::string_view::npos) return parse_eve_record(line, ctx, config);
  return parse_generic_record(line, ctx, config);
}

std::string RejectedRecord::to_line() const {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception&) {
  }
  if (!doc.is_object()) doc = json{{"_raw", text}};
  doc["_reject_reason"] = reason;
  doc["_reject_origin"] = shard + ":" + std::to_string(line);
  return doc.dump();
}

std::vector<std::filesystem::path> discover_alert_files(const std::vector<std::filesystem::path>& paths) {
  std::vector<std::filesystem::path> files;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto& entry : std::filesystem::directory_iterator(p)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".json" || ext == ".jsonl")) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (std::filesystem::exists(p)) {
      files.push_back(p);
    } else {
      throw DataError("input not found: " + p.string());
    }
  }
  return files;
}

IngestResult ingest_stream(std::istream& in, const std::string& shard, const IngestConfig& config) {
  IngestResult out;
  RecordContext ctx{shard, 0};
  std::string line;
  while (std::getline(in, line)) {
    ++ctx.line;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    try {
      if (auto alert = parse_record(line, ctx, config)) {
        out.alerts.push_back(std::move(*alert));
      } else {
        ++out.skipped;
      }
    } catch (const DataError& e) {
      out.rejects.push_back({ctx.shard, ctx.line, line, e.what()});
    }
  }
  return out;
}

IngestResult ingest_text(std::string_view text, const std::string& shard, const IngestConfig& config) {
  std::istringstream in{std::string(text)};
  return ingest_stream(in, shard, config);
}

IngestResult ingest_paths(const std::vector<std::filesystem::path>& paths, const IngestConfig& config,
                          unsigned jobs) {
  const auto files = discover_alert_files(paths);
  std::vector<IngestResult> shards(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t f) {
    std::ifstream in(files[f], std::ios::binary);
    if (!in) throw DataError("cannot open " + files[f].string());
    shards[f] = ingest_stream(in, files[f].filename().string(), config);
  });
  IngestResult merged;
  for (auto& s : shards) {
    std::move(s.alerts.begin(), s.alerts.end(), std::back_inserter(merged.alerts));
    std::move(s.rejects.begin(), s.rejects.end(), std::back_inserter(merged.rejects));
    merged.skipped += s.skipped;
  }
  return merged;
}

}  // namespace distill

#include "distill/templating.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>

#include "distill/error.hpp"
#include "distill/ingest.hpp"
#include "distill/keyvalue.hpp"
#include "distill/parallel.hpp"

namespace distill {

namespace {

void merge_into(GeneralizedAlert& into, GeneralizedAlert&& from) {
  into.score = std::max(into.score, from.score);
  std::vector<std::string> members;
  members.reserve(into.members.size() + from.members.size());
  std::merge(std::make_move_iterator(into.members.begin()), std::make_move_iterator(into.members.end()),
             std::make_move_iterator(from.members.begin()), std::make_move_iterator(from.members.end()),
             std::back_inserter(members));
  members.erase(std::unique(members.begin(), members.end()), members.end());
  into.members = std::move(members);
  into.first_seen = std::min(into.first_seen, from.first_seen);
  into.last_seen = std::max(into.last_seen, from.last_seen);
  into.tactics |= from.tactics;
  into.assets.insert(from.assets.begin(), from.assets.end());
  if (into.signature.empty()) into.signature = std::move(from.signature);
}

AttributeValue lift(AttributeValue value, int level, const HierarchyTree& tree) {
  while (value.level() < level && !tree.is_root(value)) value = tree.parent(value);
  return value;
}

const HierarchyTree& tree_for(const HierarchySet& trees, ValueKind kind) {
  const auto* tree = trees.find(kind);
  if (!tree) throw ConfigError("no hierarchy tree for attribute kind '" + std::string(value_kind_name(kind)) + "'");
  return *tree;
}

// Groups indices of `items` by source, keeping input order inside a group.
template <class T>
std::map<std::string, std::vector<std::size_t>> group_by_source(std::span<const T> items) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) groups[items[i].source].push_back(i);
  return groups;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> names;
  for (auto& n : split(text, ','))
    if (!n.empty()) names.push_back(std::move(n));
  return names;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
  return out;
}

}  // namespace

int GlPolicy::gl_for(const std::string& source, SourceKind kind) const {
  if (auto it = by_source.find(source); it != by_source.end()) return it->second;
  switch (kind) {
    case SourceKind::Signature: return signature;
    case SourceKind::Anomaly: return anomaly;
    case SourceKind::Custom: return custom;
  }
  return custom;
}

SourceCatalog build_catalog(std::span<const Alert> alerts, const GlPolicy& policy) {
  SourceCatalog catalog;
  for (const auto& alert : alerts) {
    auto [it, inserted] = catalog.try_emplace(alert.source);
    AlertSource& src = it->second;
    if (inserted) {
      src.id = alert.source;
      src.schema = alert.attribute_names();
      src.kind = alert.kind;
      src.signature = alert.signature;
      src.tactics = alert.tactics;
      src.gl = policy.gl_for(alert.source, alert.kind);
      if (src.gl < 0) throw ConfigError("gl for source '" + src.id + "' must be non-negative");
      if (static_cast<std::size_t>(src.gl) > src.schema.size())
        throw ConfigError("gl " + std::to_string(src.gl) + " exceeds the " + std::to_string(src.schema.size()) +
                          " attributes of source '" + src.id + "'");
      continue;
    }
    if (alert.attribute_names() != src.schema)
      throw DataError("alert " + alert.id + " of source '" + alert.source + "' does not match the source schema (" +
                      join_names(src.schema) + ")");
    if (alert.kind != src.kind) throw DataError("alert " + alert.id + " changes the kind of source '" + src.id + "'");
    src.tactics |= alert.tactics;
  }
  return catalog;
}

std::string select_attribute(std::span<const GeneralizedAlert> alerts, const std::vector<std::string>& schema) {
  if (alerts.empty()) throw DataError("select_attribute: empty alert set");
  if (schema.empty()) throw DataError("select_attribute: empty schema");
  const std::string& source = alerts.front().source;
  std::size_t best = 0;
  std::size_t best_count = 0;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    std::map<AttributeValue, std::size_t> counts;
    std::size_t max_count = 0;
    for (const auto& alert : alerts) {
      if (alert.source != source) throw DataError("select_attribute: alerts from more than one source");
      const auto* value = find_attribute(alert.attributes, schema[a]);
      if (!value) throw FieldError(schema[a], "missing on alert " + alert.id);
      max_count = std::max(max_count, ++counts[*value]);
    }
    if (a == 0 || max_count < best_count) {
      best = a;
      best_count = max_count;
    }
  }
  return schema[best];
}

GeneralizedAlert generalize_attribute(GeneralizedAlert alert, std::string_view attr, const HierarchySet& trees) {
  for (auto& a : alert.attributes) {
    if (a.name != attr) continue;
    a.value = tree_for(trees, a.value.kind()).parent(a.value);
    return alert;
  }
  throw FieldError(std::string(attr), "not an attribute of alert " + alert.id);
}

std::vector<GeneralizedAlert> merge_identical(std::vector<GeneralizedAlert> alerts) {
  std::map<std::pair<std::string, AttributeList>, GeneralizedAlert> merged;
  for (auto& alert : alerts) {
    auto key = std::make_pair(alert.source, alert.attributes);
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(std::move(key), std::move(alert));
    } else {
      merge_into(it->second, std::move(alert));
    }
  }
  std::vector<GeneralizedAlert> out;
  out.reserve(merged.size());
  for (auto& [key, alert] : merged) {
    alert.id = alert.members.front();
    out.push_back(std::move(alert));
  }
  return out;
}

std::vector<std::pair<std::string, int>> SourceTemplate::levels() const {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& name : selections) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == name; });
    if (it == out.end()) {
      out.emplace_back(name, 1);
    } else {
      ++it->second;
    }
  }
  return out;
}

std::string TemplateModel::serialize() const {
  std::string out =
      "# Learned alert templates. One block per source; 'select' lists the attributes\n"
      "# generalized, in order (a repeated name climbs one more hierarchy level).\n"
      "schema = 1\n";
  for (const auto& c : network.internal) out += "internal = " + c.to_string() + "\n";
  for (const auto& [id, t] : sources) {
    out += "\n";
    out += "kind " + id + " = " + std::string(source_kind_name(t.kind)) + "\n";
    out += "gl " + id + " = " + std::to_string(t.gl) + "\n";
    out += "attributes " + id + " = " + join_names(t.schema) + "\n";
    if (!t.signature.empty()) out += "signature " + id + " = " + t.signature + "\n";
    out += "select " + id + " = " + join_names(t.selections) + "\n";
  }
  return out;
}

TemplateModel TemplateModel::parse(std::string_view text, std::string_view name) {
  TemplateModel model;
  for (const auto& e : KeyValueDocument::parse(text, name).entries) {
    if (e.key == "internal") {
      auto cidr = Cidr::parse(e.value);
      if (!cidr) throw ParseError("invalid CIDR '" + e.value + "'", e.line);
      model.network.internal.push_back(*cidr);
      continue;
    }
    const auto space = e.key.find(' ');
    if (space == std::string::npos) throw ParseError("unknown key '" + e.key + "'", e.line);
    const std::string field = e.key.substr(0, space);
    const std::string id = trim(e.key.substr(space + 1));
    SourceTemplate& t = model.sources[id];
    t.source = id;
    if (field == "kind") {
      auto kind = parse_source_kind(e.value);
      if (!kind) throw ParseError("unknown source kind '" + e.value + "'", e.line);
      t.kind = *kind;
    } else if (field == "gl") {
      try {
        t.gl = std::stoi(e.value);
      } catch (const std::exception&) {
        throw ParseError("gl must be an integer", e.line);
      }
    } else if (field == "attributes") {
      t.schema = split_names(e.value);
    } else if (field == "signature") {
      t.signature = e.value;
    } else if (field == "select") {
      t.selections = split_names(e.value);
    } else {
      throw ParseError("unknown key '" + e.key + "'", e.line);
    }
  }
  model.network = normalize(std::move(model.network));
  for (const auto& [id, t] : model.sources) {
    if (t.gl < 0 || static_cast<std::size_t>(t.gl) > t.schema.size())
      throw ConfigError("templates: gl out of range for source '" + id + "'");
    if (t.selections.size() > static_cast<std::size_t>(t.gl))
      throw ConfigError("templates: source '" + id + "' generalizes more than gl attributes");
    for (const auto& s : t.selections)
      if (std::find(t.schema.begin(), t.schema.end(), s) == t.schema.end())
        throw ConfigError("templates: source '" + id + "' selects unknown attribute '" + s + "'");
  }
  return model;
}

TemplateModel TemplateModel::load(const std::string& path) { return parse(read_file(path), path); }

void TemplateModel::save(const std::string& path) const { write_file(path, serialize()); }

void assign_generalized_ids(std::vector<GeneralizedAlert>& alerts) {
  std::sort(alerts.begin(), alerts.end(), [](const GeneralizedAlert& a, const GeneralizedAlert& b) {
    if (a.first_seen != b.first_seen) return a.first_seen < b.first_seen;
    if (a.source != b.source) return a.source < b.source;
    return a.members.front() < b.members.front();
  });
  const int width = alerts.size() < 10000 ? 4 : static_cast<int>(std::to_string(alerts.size()).size());
  for (std::size_t i = 0; i < alerts.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "ga-%0*zu", width, i + 1);
    alerts[i].id = buf;
  }
}

TemplatingResult run_templating(std::span<const Alert> alerts, const SourceCatalog& catalog,
                                const NetworkConfig& network, unsigned jobs) {
  const HierarchySet trees = HierarchySet::defaults(network);
  const auto groups = group_by_source(alerts);
  for (const auto& [source, idx] : groups)
    if (catalog.find(source) == catalog.end()) throw DataError("source '" + source + "' is not in the catalog");

  std::vector<const std::pair<const std::string, std::vector<std::size_t>>*> work;
  for (const auto& g : groups) work.push_back(&g);
  std::vector<std::vector<GeneralizedAlert>> per_source(work.size());
  std::vector<SourceTemplate> templates(work.size());

  parallel_for(work.size(), jobs, [&](std::size_t w) {
    const auto& [source, idx] = *work[w];
    const AlertSource& src = catalog.at(source);
    std::vector<GeneralizedAlert> current;
    current.reserve(idx.size());
    for (auto i : idx) {
      if (alerts[i].attribute_names() != src.schema)
        throw DataError("alert " + alerts[i].id + " does not match the schema of source '" + source + "'");
      current.push_back(GeneralizedAlert::from_alert(alerts[i]));
    }
    SourceTemplate& t = templates[w];
    t.source = source;
    t.kind = src.kind;
    t.signature = src.signature;
    t.gl = src.gl;
    t.schema = src.schema;
    for (int round = 0; round < src.gl; ++round) {
      const std::string attr = select_attribute(current, src.schema);
      t.selections.push_back(attr);
      for (auto& g : current) g = generalize_attribute(std::move(g), attr, trees);
      current = merge_identical(std::move(current));
    }
    // Counting runs on the raw alerts, so duplicates are only folded once a
    // round has happened or when nothing is generalized at all.
    if (src.gl == 0) current = merge_identical(std::move(current));
    per_source[w] = std::move(current);
  });

  TemplatingResult result;
  result.model.network = network;
  for (auto& t : templates) result.model.sources.emplace(t.source, std::move(t));
  for (auto& g : per_source) std::move(g.begin(), g.end(), std::back_inserter(result.generalized));
  assign_generalized_ids(result.generalized);
  return result;
}

std::vector<GeneralizedAlert> apply_model(std::span<const GeneralizedAlert> alerts, const TemplateModel& model,
                                          unsigned jobs) {
  const HierarchySet trees = model.trees();
  const auto groups = group_by_source(alerts);
  std::vector<const std::pair<const std::string, std::vector<std::size_t>>*> work;
  for (const auto& g : groups) {
    if (model.sources.find(g.first) == model.sources.end())
      throw DataError("source '" + g.first + "' is not in the template model");
    work.push_back(&g);
  }
  std::vector<std::vector<GeneralizedAlert>> per_source(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t w) {
    const auto& [source, idx] = *work[w];
    const SourceTemplate& t = model.sources.at(source);
    const auto levels = t.levels();
    std::vector<GeneralizedAlert> current;
    current.reserve(idx.size());
    for (auto i : idx) {
      GeneralizedAlert g = alerts[i];
      if (g.attributes.size() != t.schema.size())
        throw DataError("alert " + g.id + " does not match the schema of source '" + source + "'");
      for (std::size_t a = 0; a < t.schema.size(); ++a)
        if (g.attributes[a].name != t.schema[a])
          throw DataError("alert " + g.id + " does not match the schema of source '" + source + "'");
      for (const auto& [name, level] : levels) {
        for (auto& a : g.attributes)
          if (a.name == name) a.value = lift(a.value, level, tree_for(trees, a.value.kind()));
      }
      current.push_back(std::move(g));
    }
    per_source[w] = merge_identical(std::move(current));
  });
  std::vector<GeneralizedAlert> out;
  for (auto& g : per_source) std::move(g.begin(), g.end(), std::back_inserter(out));
  assign_generalized_ids(out);
  return out;
}

std::vector<GeneralizedAlert> apply_model(std::span<const Alert> alerts, const TemplateModel& model, unsigned jobs) {
  std::vector<GeneralizedAlert> wrapped;
  wrapped.reserve(alerts.size());
  for (const auto& a : alerts) wrapped.push_back(GeneralizedAlert::from_alert(a));
  return apply_model(std::span<const GeneralizedAlert>(wrapped), model, jobs);
}

}  // namespace distill

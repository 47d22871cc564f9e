#include "distill/alert.hpp"

#include <charconv>

#include "distill/error.hpp"

namespace distill {

std::string_view value_kind_name(ValueKind kind) noexcept {
  switch (kind) {
    case ValueKind::Ip: return "ip";
    case ValueKind::Port: return "port";
    case ValueKind::Text: return "text";
  }
  return "text";
}

std::optional<ValueKind> parse_value_kind(std::string_view text) {
  if (text == "ip") return ValueKind::Ip;
  if (text == "port") return ValueKind::Port;
  if (text == "text") return ValueKind::Text;
  return std::nullopt;
}

AttributeValue AttributeValue::ip(const IpAddress& address) {
  AttributeValue v;
  v.kind_ = ValueKind::Ip;
  v.ip_ = address;
  v.text_ = address.to_string();
  return v;
}

AttributeValue AttributeValue::port(std::uint16_t number) {
  AttributeValue v;
  v.kind_ = ValueKind::Port;
  v.port_ = number;
  v.text_ = std::to_string(number);
  return v;
}

AttributeValue AttributeValue::text(std::string value) {
  AttributeValue v;
  v.kind_ = ValueKind::Text;
  v.text_ = std::move(value);
  return v;
}

AttributeValue AttributeValue::node(ValueKind kind, std::string label, int level) {
  AttributeValue v;
  v.kind_ = kind;
  v.level_ = level;
  v.text_ = std::move(label);
  return v;
}

std::optional<AttributeValue> AttributeValue::decode(ValueKind kind, std::string_view text, int level) {
  if (level < 0) return std::nullopt;
  if (level > 0) return node(kind, std::string(text), level);
  switch (kind) {
    case ValueKind::Ip: {
      auto ip = IpAddress::parse(text);
      if (!ip) return std::nullopt;
      return AttributeValue::ip(*ip);
    }
    case ValueKind::Port: {
      unsigned value = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc{} || ptr != text.data() + text.size() || value > 65535) return std::nullopt;
      return AttributeValue::port(static_cast<std::uint16_t>(value));
    }
    case ValueKind::Text: return AttributeValue::text(std::string(text));
  }
  return std::nullopt;
}

std::optional<IpAddress> AttributeValue::as_ip() const {
  if (kind_ != ValueKind::Ip || level_ != 0) return std::nullopt;
  return ip_;
}

std::optional<std::uint16_t> AttributeValue::as_port() const {
  if (kind_ != ValueKind::Port || level_ != 0) return std::nullopt;
  return port_;
}

const AttributeValue* find_attribute(const AttributeList& attributes, std::string_view name) {
  for (const auto& a : attributes)
    if (a.name == name) return &a.value;
  return nullptr;
}

std::string_view source_kind_name(SourceKind kind) noexcept {
  switch (kind) {
    case SourceKind::Signature: return "signature";
    case SourceKind::Anomaly: return "anomaly";
    case SourceKind::Custom: return "custom";
  }
  return "custom";
}

std::optional<SourceKind> parse_source_kind(std::string_view text) {
  if (text == "signature" || text == "ids") return SourceKind::Signature;
  if (text == "anomaly" || text == "ueba") return SourceKind::Anomaly;
  if (text == "custom") return SourceKind::Custom;
  return std::nullopt;
}

int default_gl(SourceKind kind) noexcept { return kind == SourceKind::Signature ? 2 : 1; }

std::vector<std::string> Alert::attribute_names() const {
  std::vector<std::string> names;
  names.reserve(attributes.size());
  for (const auto& a : attributes) names.push_back(a.name);
  return names;
}

void validate(const Alert& alert) {
  if (alert.id.empty()) throw FieldError("id", "must not be empty");
  if (alert.source.empty()) throw FieldError("source", "must not be empty");
  if (!(alert.score >= 0.0 && alert.score <= 1.0)) throw FieldError("score", "must lie in [0,1]");
  if (alert.attributes.size() < 2) throw FieldError("attributes", "an alert needs at least two attributes");
  for (std::size_t i = 0; i < alert.attributes.size(); ++i)
    for (std::size_t j = i + 1; j < alert.attributes.size(); ++j)
      if (alert.attributes[i].name == alert.attributes[j].name)
        throw FieldError("attributes", "duplicate attribute '" + alert.attributes[i].name + "'");
  if (alert.tactics.empty()) throw FieldError("tactics", "at least one tactic is required");
  for (const auto& asset : alert.assets) {
    bool found = false;
    for (const auto& a : alert.attributes) {
      if (auto ip = a.value.as_ip(); ip && *ip == asset) {
        found = true;
        break;
      }
    }
    if (!found) throw FieldError("assets", asset.to_string() + " is not an IP attribute of the alert");
  }
}

GeneralizedAlert GeneralizedAlert::from_alert(const Alert& alert) {
  GeneralizedAlert g;
  g.id = alert.id;
  g.source = alert.source;
  g.signature = alert.signature;
  g.kind = alert.kind;
  g.attributes = alert.attributes;
  g.score = alert.score;
  g.members = {alert.id};
  g.first_seen = alert.timestamp;
  g.last_seen = alert.timestamp;
  g.tactics = alert.tactics;
  g.assets = alert.assets;
  return g;
}

std::vector<IpAddress> GeneralizedAlert::ip_values(std::string_view name_filter) const {
  std::vector<IpAddress> out;
  for (const auto& a : attributes) {
    if (!name_filter.empty() && a.name.find(name_filter) == std::string::npos) continue;
    if (auto ip = a.value.as_ip()) out.push_back(*ip);
  }
  return out;
}

}  // namespace distill

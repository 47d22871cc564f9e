#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "distill/ip.hpp"
#include "distill/tactic.hpp"
#include "distill/time.hpp"

namespace distill {

enum class ValueKind : std::uint8_t { Ip, Port, Text };

std::string_view value_kind_name(ValueKind kind) noexcept;
std::optional<ValueKind> parse_value_kind(std::string_view text);

/// Tagged attribute value. Level 0 is an observed value; higher levels are
/// hierarchy nodes produced by generalization ("private-IP", "ANY-Port", ...).
class AttributeValue {
 public:
  AttributeValue() = default;

  static AttributeValue ip(const IpAddress& address);
  static AttributeValue port(std::uint16_t number);
  static AttributeValue text(std::string value);
  static AttributeValue node(ValueKind kind, std::string label, int level);

  /// Rebuilds a value from its serialized parts; level 0 IP/port text is parsed.
  static std::optional<AttributeValue> decode(ValueKind kind, std::string_view text, int level);

  ValueKind kind() const noexcept { return kind_; }
  int level() const noexcept { return level_; }
  bool is_leaf() const noexcept { return level_ == 0; }
  const std::string& str() const noexcept { return text_; }

  std::optional<IpAddress> as_ip() const;
  std::optional<std::uint16_t> as_port() const;

  friend bool operator==(const AttributeValue& a, const AttributeValue& b) {
    return a.kind_ == b.kind_ && a.level_ == b.level_ && a.text_ == b.text_;
  }
  friend std::strong_ordering operator<=>(const AttributeValue& a, const AttributeValue& b) {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    if (auto c = a.level_ <=> b.level_; c != 0) return c;
    return a.text_.compare(b.text_) <=> 0;
  }

 private:
  ValueKind kind_ = ValueKind::Text;
  int level_ = 0;
  std::string text_;
  IpAddress ip_;
  std::uint16_t port_ = 0;
};

struct Attribute {
  std::string name;
  AttributeValue value;

  friend bool operator==(const Attribute&, const Attribute&) = default;
  friend auto operator<=>(const Attribute&, const Attribute&) = default;
};

/// Attributes in source-schema order.
using AttributeList = std::vector<Attribute>;

const AttributeValue* find_attribute(const AttributeList& attributes, std::string_view name);

enum class SourceKind : std::uint8_t { Signature, Anomaly, Custom };

std::string_view source_kind_name(SourceKind kind) noexcept;
std::optional<SourceKind> parse_source_kind(std::string_view text);

/// One raw detection record.
struct Alert {
  std::string id;
  Timestamp timestamp{};
  std::string source;     // rule id or detector name
  std::string signature;  // human readable rule text, may be empty
  SourceKind kind = SourceKind::Signature;
  AttributeList attributes;
  double score = 0.0;
  TacticSet tactics;
  std::set<IpAddress> assets;

  std::vector<std::string> attribute_names() const;
};

/// Throws FieldError when an alert breaks a record invariant
/// (score range, >= 2 attributes, non-empty tactics, assets among IP attributes).
void validate(const Alert& alert);

struct AlertSource {
  std::string id;
  std::vector<std::string> schema;
  int gl = 0;
  TacticSet tactics;
  SourceKind kind = SourceKind::Signature;
  std::string signature;
};

/// Default number of attributes generalized per source kind: 2 for IDS
/// signatures, 1 for anomaly detectors and custom rules.
int default_gl(SourceKind kind) noexcept;

/// A merged alert whose attributes may be generalized.
struct GeneralizedAlert {
  std::string id;
  std::string source;
  std::string signature;
  SourceKind kind = SourceKind::Signature;
  AttributeList attributes;
  double score = 0.0;
  std::vector<std::string> members;  // sorted raw alert ids
  Timestamp first_seen{};
  Timestamp last_seen{};
  TacticSet tactics;
  std::set<IpAddress> assets;

  /// Singleton generalized alert wrapping one raw alert.
  static GeneralizedAlert from_alert(const Alert& alert);

  std::vector<IpAddress> ip_values(std::string_view name_filter = {}) const;
};

}  // namespace distill

#pragma once

#include <map>
#include <string>

#include "distill/alert.hpp"
#include "distill/ip.hpp"

namespace distill {

/// Generalization tree over one attribute kind. Parent of the root is the root.
///
///   ip:     address -> {private-IP | external-IP} -> ANY-IP
///   port:   number  -> {private-Port [0,1023] | Non-private-Port [1024,65535]} -> ANY-Port
///   opaque: value   -> ANY
class HierarchyTree {
 public:
  static HierarchyTree ip(NetworkConfig network);
  static HierarchyTree port();
  static HierarchyTree opaque();

  ValueKind kind() const noexcept { return kind_; }
  AttributeValue root() const;
  bool is_root(const AttributeValue& value) const;
  /// Number of levels above the leaves (root level).
  int height() const noexcept { return kind_ == ValueKind::Text ? 1 : 2; }

  /// Throws ConfigError when the value kind does not match the tree.
  AttributeValue parent(const AttributeValue& value) const;

 private:
  explicit HierarchyTree(ValueKind kind) : kind_(kind) {}

  ValueKind kind_;
  NetworkConfig network_;
};

namespace labels {
inline constexpr const char* kPrivateIp = "private-IP";
inline constexpr const char* kExternalIp = "external-IP";
inline constexpr const char* kAnyIp = "ANY-IP";
inline constexpr const char* kPrivatePort = "private-Port";
inline constexpr const char* kNonPrivatePort = "Non-private-Port";
inline constexpr const char* kAnyPort = "ANY-Port";
inline constexpr const char* kAny = "ANY";
}  // namespace labels

/// Trees keyed by attribute kind.
class HierarchySet {
 public:
  HierarchySet() = default;
  static HierarchySet defaults(const NetworkConfig& network);

  void set(HierarchyTree tree);
  /// nullptr when no tree is registered for the kind.
  const HierarchyTree* find(ValueKind kind) const;

 private:
  std::map<ValueKind, HierarchyTree> trees_;
};

}  // namespace distill

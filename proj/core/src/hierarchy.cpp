#include "distill/hierarchy.hpp"

#include "distill/error.hpp"

namespace distill {

HierarchyTree HierarchyTree::ip(NetworkConfig network) {
  HierarchyTree tree(ValueKind::Ip);
  tree.network_ = std::move(network);
  return tree;
}

HierarchyTree HierarchyTree::port() { return HierarchyTree(ValueKind::Port); }
HierarchyTree HierarchyTree::opaque() { return HierarchyTree(ValueKind::Text); }

AttributeValue HierarchyTree::root() const {
  switch (kind_) {
    case ValueKind::Ip: return AttributeValue::node(ValueKind::Ip, labels::kAnyIp, 2);
    case ValueKind::Port: return AttributeValue::node(ValueKind::Port, labels::kAnyPort, 2);
    case ValueKind::Text: return AttributeValue::node(ValueKind::Text, labels::kAny, 1);
  }
  throw InternalError("unknown hierarchy kind");
}

bool HierarchyTree::is_root(const AttributeValue& value) const { return value == root(); }

AttributeValue HierarchyTree::parent(const AttributeValue& value) const {
  if (value.kind() != kind_)
    throw ConfigError("hierarchy tree for '" + std::string(value_kind_name(kind_)) + "' cannot generalize a '" +
                      std::string(value_kind_name(value.kind())) + "' value");
  if (value.level() >= height()) return root();
  if (value.level() > 0) return root();

  switch (kind_) {
    case ValueKind::Ip: {
      const auto ip = value.as_ip();
      const bool internal = ip && network_.is_internal(*ip);
      return AttributeValue::node(ValueKind::Ip, internal ? labels::kPrivateIp : labels::kExternalIp, 1);
    }
    case ValueKind::Port: {
      const auto port = value.as_port();
      const bool privileged = port && *port <= 1023;
      return AttributeValue::node(ValueKind::Port, privileged ? labels::kPrivatePort : labels::kNonPrivatePort, 1);
    }
    case ValueKind::Text: return root();
  }
  throw InternalError("unknown hierarchy kind");
}

HierarchySet HierarchySet::defaults(const NetworkConfig& network) {
  HierarchySet set;
  set.set(HierarchyTree::ip(network));
  set.set(HierarchyTree::port());
  set.set(HierarchyTree::opaque());
  return set;
}

void HierarchySet::set(HierarchyTree tree) {
  const auto kind = tree.kind();
  trees_.insert_or_assign(kind, std::move(tree));
}

const HierarchyTree* HierarchySet::find(ValueKind kind) const {
  auto it = trees_.find(kind);
  return it == trees_.end() ? nullptr : &it->second;
}

}  // namespace distill

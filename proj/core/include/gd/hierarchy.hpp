#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gd/model.hpp"

namespace gd {

struct NodeId {
  std::uint64_t value = 0;

  auto operator<=>(const NodeId&) const = default;
};

inline std::string to_string(NodeId id) { return std::to_string(id.value); }

struct HierarchyNode {
  NodeId id;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;       // insertion order
  std::vector<EncounterId> encounters;  // assigned directly here
  /// Oracle-side label (ground-truth correspondent). Recognition never
  /// reads it.
  std::optional<std::string> annotation;
};

using EncounterPtr = std::shared_ptr<const Encounter>;

/// The machine's tree of objects and genera. The root stands for "object"
/// and never holds encounters directly. Node ids are assigned 0, 1, 2, ...
/// with the root at 0; nodes are never removed.
///
/// Every mutation stamps the touched node and all its ancestors with a
/// fresh process-wide counter value, so (node, stamp) identifies subtree
/// content across copies. Copies are cheap: encounters are shared.
class Hierarchy {
 public:
  explicit Hierarchy(std::optional<std::string> rootAnnotation = std::nullopt);

  NodeId root() const noexcept { return NodeId{0}; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains(NodeId n) const noexcept { return n.value < nodes_.size(); }

  const HierarchyNode& node(NodeId n) const;
  /// Throws PreconditionError for the root.
  NodeId parentOf(NodeId n) const;
  const std::vector<NodeId>& childrenOf(NodeId n) const;
  int depth(NodeId n) const;
  bool isAncestorOrSelf(NodeId ancestor, NodeId n) const;
  NodeId lowestCommonAncestor(NodeId a, NodeId b) const;
  /// Number of edges on the tree path between a and b.
  int geodesicDistance(NodeId a, NodeId b) const;

  /// Creates a leaf holding `e` under `parent`.
  NodeId addObjectNode(NodeId parent, EncounterPtr e,
                       std::optional<std::string> annotation = std::nullopt);
  /// Adds `e` to an existing non-root node.
  void addEncounterToNode(NodeId n, EncounterPtr e);
  /// Creates m under `parent`, moves `childToReparent` under m and adds a
  /// new leaf for `e` under m. Returns {m, new leaf}. m takes the place of
  /// the reparented child in the parent's child order.
  std::pair<NodeId, NodeId> insertIntermediate(
      NodeId parent, NodeId childToReparent, EncounterPtr e,
      std::optional<std::string> intermediateAnnotation = std::nullopt,
      std::optional<std::string> leafAnnotation = std::nullopt);

  /// All visual objects of encounters at n or below, in pre-order.
  std::vector<const VisualObject*> subtreeVisualObjects(NodeId n) const;
  /// Encounters at n or below, in the same pre-order.
  std::vector<EncounterPtr> subtreeEncounters(NodeId n) const;
  std::size_t encounterCount() const noexcept { return encounters_.size(); }
  const Encounter& encounter(const EncounterId& id) const;
  bool hasEncounter(const EncounterId& id) const;
  /// Node the encounter was assigned to.
  NodeId nodeOfEncounter(const EncounterId& id) const;

  std::uint64_t stamp(NodeId n) const;

  /// {"root": 0, "nodes": [{"id", "parent", "children", "encounters",
  /// "annotation"}...]} with nodes in id order.
  nlohmann::json toJson() const;
  /// Inverse of toJson; `lookup` supplies the encounter for each id.
  static Hierarchy fromJson(
      const nlohmann::json& snapshot,
      const std::function<EncounterPtr(const EncounterId&)>& lookup);

 private:
  HierarchyNode& mutableNode(NodeId n);
  NodeId createNode(NodeId parent, std::optional<std::string> annotation);
  void attachEncounter(NodeId n, EncounterPtr e);
  void touch(NodeId n);

  std::vector<HierarchyNode> nodes_;
  std::vector<std::uint64_t> stamps_;
  std::unordered_map<EncounterId, std::pair<EncounterPtr, NodeId>> encounters_;
};

}  // namespace gd

template <>
struct std::hash<gd::NodeId> {
  std::size_t operator()(gd::NodeId id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};

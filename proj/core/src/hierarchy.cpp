#include "gd/hierarchy.hpp"

#include <algorithm>
#include <atomic>

#include "gd/errors.hpp"

namespace gd {

namespace {

std::uint64_t freshStamp() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

Hierarchy::Hierarchy(std::optional<std::string> rootAnnotation) {
  HierarchyNode root;
  root.id = NodeId{0};
  root.annotation = std::move(rootAnnotation);
  nodes_.push_back(std::move(root));
  stamps_.push_back(freshStamp());
}

const HierarchyNode& Hierarchy::node(NodeId n) const {
  if (!contains(n)) {
    throw PreconditionError("unknown node " + to_string(n));
  }
  return nodes_[n.value];
}

HierarchyNode& Hierarchy::mutableNode(NodeId n) {
  if (!contains(n)) {
    throw PreconditionError("unknown node " + to_string(n));
  }
  return nodes_[n.value];
}

NodeId Hierarchy::parentOf(NodeId n) const {
  const auto& p = node(n).parent;
  if (!p) throw PreconditionError("the root has no parent");
  return *p;
}

const std::vector<NodeId>& Hierarchy::childrenOf(NodeId n) const {
  return node(n).children;
}

int Hierarchy::depth(NodeId n) const {
  int d = 0;
  for (auto p = node(n).parent; p; p = nodes_[p->value].parent) ++d;
  return d;
}

bool Hierarchy::isAncestorOrSelf(NodeId ancestor, NodeId n) const {
  std::optional<NodeId> cur = n;
  node(n);
  while (cur) {
    if (*cur == ancestor) return true;
    cur = nodes_[cur->value].parent;
  }
  return false;
}

NodeId Hierarchy::lowestCommonAncestor(NodeId a, NodeId b) const {
  int da = depth(a);
  int db = depth(b);
  for (; da > db; --da) a = *nodes_[a.value].parent;
  for (; db > da; --db) b = *nodes_[b.value].parent;
  while (a != b) {
    a = *nodes_[a.value].parent;
    b = *nodes_[b.value].parent;
  }
  return a;
}

int Hierarchy::geodesicDistance(NodeId a, NodeId b) const {
  const NodeId lca = lowestCommonAncestor(a, b);
  return depth(a) + depth(b) - 2 * depth(lca);
}

void Hierarchy::touch(NodeId n) {
  const std::uint64_t s = freshStamp();
  for (std::optional<NodeId> cur = n; cur; cur = nodes_[cur->value].parent) {
    stamps_[cur->value] = s;
  }
}

std::uint64_t Hierarchy::stamp(NodeId n) const {
  node(n);
  return stamps_[n.value];
}

NodeId Hierarchy::createNode(NodeId parent,
                             std::optional<std::string> annotation) {
  HierarchyNode fresh;
  fresh.id = NodeId{nodes_.size()};
  fresh.parent = parent;
  fresh.annotation = std::move(annotation);
  nodes_.push_back(std::move(fresh));
  stamps_.push_back(freshStamp());
  return nodes_.back().id;
}

void Hierarchy::attachEncounter(NodeId n, EncounterPtr e) {
  if (!e) throw InvalidInput("null encounter");
  validateEncounter(*e);
  if (encounters_.contains(e->id)) {
    throw InvalidInput("encounter '" + e->id + "' is already placed");
  }
  if (!encounters_.empty()) {
    const auto& any = *encounters_.begin()->second.first;
    if (any.dimension() != e->dimension()) {
      throw InvalidInput("encounter dimension differs from the hierarchy's");
    }
  }
  std::string id = e->id;
  nodes_[n.value].encounters.push_back(id);
  encounters_.emplace(std::move(id), std::make_pair(std::move(e), n));
}

NodeId Hierarchy::addObjectNode(NodeId parent, EncounterPtr e,
                                std::optional<std::string> annotation) {
  node(parent);
  if (!e) throw InvalidInput("null encounter");
  if (encounters_.contains(e->id)) {
    throw InvalidInput("encounter '" + e->id + "' is already placed");
  }
  const NodeId n = createNode(parent, std::move(annotation));
  nodes_[parent.value].children.push_back(n);
  try {
    attachEncounter(n, std::move(e));
  } catch (...) {
    nodes_[parent.value].children.pop_back();
    nodes_.pop_back();
    stamps_.pop_back();
    throw;
  }
  touch(n);
  return n;
}

void Hierarchy::addEncounterToNode(NodeId n, EncounterPtr e) {
  node(n);
  if (n == root()) {
    throw PreconditionError("the root never holds encounters directly");
  }
  attachEncounter(n, std::move(e));
  touch(n);
}

std::pair<NodeId, NodeId> Hierarchy::insertIntermediate(
    NodeId parent, NodeId childToReparent, EncounterPtr e,
    std::optional<std::string> intermediateAnnotation,
    std::optional<std::string> leafAnnotation) {
  auto& siblings = mutableNode(parent).children;
  const auto pos = std::find(siblings.begin(), siblings.end(), childToReparent);
  if (pos == siblings.end()) {
    throw PreconditionError("node " + to_string(childToReparent) +
                            " is not a child of " + to_string(parent));
  }
  if (!e) throw InvalidInput("null encounter");
  validateEncounter(*e);
  if (encounters_.contains(e->id)) {
    throw InvalidInput("encounter '" + e->id + "' is already placed");
  }
  const auto index = static_cast<std::size_t>(pos - siblings.begin());
  const NodeId m = createNode(parent, std::move(intermediateAnnotation));
  nodes_[parent.value].children[index] = m;
  nodes_[m.value].children.push_back(childToReparent);
  nodes_[childToReparent.value].parent = m;
  const NodeId leaf = createNode(m, std::move(leafAnnotation));
  nodes_[m.value].children.push_back(leaf);
  attachEncounter(leaf, std::move(e));
  touch(leaf);
  return {m, leaf};
}

std::vector<const VisualObject*> Hierarchy::subtreeVisualObjects(
    NodeId n) const {
  node(n);
  std::vector<const VisualObject*> out;
  std::vector<NodeId> stack{n};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    for (const auto& id : nodes_[cur.value].encounters) {
      for (const auto& vo : encounters_.at(id).first->visualObjects) {
        out.push_back(&vo);
      }
    }
    const auto& ch = nodes_[cur.value].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<EncounterPtr> Hierarchy::subtreeEncounters(NodeId n) const {
  node(n);
  std::vector<EncounterPtr> out;
  std::vector<NodeId> stack{n};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    for (const auto& id : nodes_[cur.value].encounters) {
      out.push_back(encounters_.at(id).first);
    }
    const auto& ch = nodes_[cur.value].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

const Encounter& Hierarchy::encounter(const EncounterId& id) const {
  const auto it = encounters_.find(id);
  if (it == encounters_.end()) {
    throw PreconditionError("unknown encounter '" + id + "'");
  }
  return *it->second.first;
}

bool Hierarchy::hasEncounter(const EncounterId& id) const {
  return encounters_.contains(id);
}

NodeId Hierarchy::nodeOfEncounter(const EncounterId& id) const {
  const auto it = encounters_.find(id);
  if (it == encounters_.end()) {
    throw PreconditionError("unknown encounter '" + id + "'");
  }
  return it->second.second;
}

nlohmann::json Hierarchy::toJson() const {
  using nlohmann::json;
  json nodes = json::array();
  for (const auto& n : nodes_) {
    json j;
    j["id"] = n.id.value;
    j["parent"] = n.parent ? json(n.parent->value) : json(nullptr);
    json children = json::array();
    for (NodeId c : n.children) children.push_back(c.value);
    j["children"] = std::move(children);
    j["encounters"] = n.encounters;
    j["annotation"] = n.annotation ? json(*n.annotation) : json(nullptr);
    nodes.push_back(std::move(j));
  }
  return json{{"root", 0}, {"nodes", std::move(nodes)}};
}

Hierarchy Hierarchy::fromJson(
    const nlohmann::json& snapshot,
    const std::function<EncounterPtr(const EncounterId&)>& lookup) {
  try {
    const auto& nodes = snapshot.at("nodes");
    if (snapshot.at("root").get<std::uint64_t>() != 0 || nodes.empty()) {
      throw InvalidInput("snapshot root must be node 0");
    }
    Hierarchy h;
    h.nodes_.clear();
    h.stamps_.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& j = nodes[i];
      if (j.at("id").get<std::uint64_t>() != i) {
        throw InvalidInput("snapshot node ids must be 0..n-1 in order");
      }
      HierarchyNode n;
      n.id = NodeId{i};
      if (!j.at("parent").is_null()) {
        n.parent = NodeId{j.at("parent").get<std::uint64_t>()};
      }
      for (const auto& c : j.at("children")) {
        n.children.push_back(NodeId{c.get<std::uint64_t>()});
      }
      if (!j.at("annotation").is_null()) {
        n.annotation = j.at("annotation").get<std::string>();
      }
      h.nodes_.push_back(std::move(n));
      h.stamps_.push_back(freshStamp());
    }
    // Structural checks: one root, consistent links, every node reached once.
    if (h.nodes_[0].parent) throw InvalidInput("snapshot root has a parent");
    std::vector<int> seen(h.nodes_.size(), 0);
    std::vector<NodeId> stack{NodeId{0}};
    while (!stack.empty()) {
      const NodeId cur = stack.back();
      stack.pop_back();
      if (seen[cur.value]++) throw InvalidInput("snapshot is not a tree");
      for (NodeId c : h.nodes_[cur.value].children) {
        if (c.value >= h.nodes_.size() || h.nodes_[c.value].parent != cur) {
          throw InvalidInput("snapshot parent/child links disagree");
        }
        stack.push_back(c);
      }
    }
    if (std::count(seen.begin(), seen.end(), 1) !=
        static_cast<long>(h.nodes_.size())) {
      throw InvalidInput("snapshot has unreachable nodes");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (const auto& eid : nodes[i].at("encounters")) {
        auto e = lookup(eid.get<std::string>());
        if (!e) throw InvalidInput("unknown encounter in snapshot");
        if (i == 0) throw InvalidInput("snapshot root holds encounters");
        h.attachEncounter(NodeId{i}, std::move(e));
      }
    }
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed hierarchy snapshot: ") + e.what());
  }
}

}  // namespace gd

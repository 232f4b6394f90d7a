#include "gd/oracle.hpp"

#include <set>

#include "gd/errors.hpp"

namespace gd {

std::string_view to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::Genus:
      return "genus";
    case QueryKind::SameObject:
      return "same_object";
    case QueryKind::SharesGenusBelow:
      return "shares_genus_below";
  }
  return "unknown";
}

QueryKind queryKindFromString(std::string_view name) {
  if (name == "genus") return QueryKind::Genus;
  if (name == "same_object") return QueryKind::SameObject;
  if (name == "shares_genus_below") return QueryKind::SharesGenusBelow;
  throw InvalidInput("unknown query kind '" + std::string(name) + "'");
}

nlohmann::json toJson(const Query& query) {
  return nlohmann::json{
      {"kind", to_string(query.kind)},
      {"encounter_id", query.encounter},
      {"node", query.subject.value},
      {"under", query.under ? nlohmann::json(query.under->value)
                            : nlohmann::json(nullptr)}};
}

std::optional<std::string> Annotator::objectAnnotation(const Encounter&) const {
  return std::nullopt;
}

std::optional<std::string> Annotator::intermediateAnnotation(
    const Hierarchy&, NodeId, const Encounter&) const {
  return std::nullopt;
}

std::optional<std::string> GroundTruthAnnotator::objectAnnotation(
    const Encounter& e) const {
  return e.groundTruthLeaf;
}

std::optional<std::string> GroundTruthAnnotator::intermediateAnnotation(
    const Hierarchy& h, NodeId reparentedChild, const Encounter& e) const {
  const auto& childLabel = h.node(reparentedChild).annotation;
  if (!childLabel || !e.groundTruthLeaf) return std::nullopt;
  return commonLabelPrefix(*childLabel, *e.groundTruthLeaf);
}

bool ask(Oracle& oracle, const Hierarchy& h, const Encounter& e,
         const Query& query) {
  switch (query.kind) {
    case QueryKind::Genus:
      return oracle.genusOf(h, e, query.subject);
    case QueryKind::SameObject:
      return oracle.sameObject(h, e, query.subject);
    case QueryKind::SharesGenusBelow:
      if (!query.under) {
        throw PreconditionError("shares-genus-below query without 'under'");
      }
      return oracle.sharesGenusBelow(h, e, query.subject, *query.under);
  }
  throw PreconditionError("unknown query kind");
}

GtIndex SimulatedOracle::correspondent(const Hierarchy& h, NodeId n) const {
  const auto& label = h.node(n).annotation;
  if (!label) {
    throw ConsistencyError("machine node " + to_string(n) +
                           " has no ground-truth correspondent");
  }
  return tree_->at(*label);
}

GtIndex SimulatedOracle::leafOf(const Encounter& e) const {
  if (!e.groundTruthLeaf) {
    throw ConsistencyError("encounter '" + e.id + "' has no ground-truth leaf");
  }
  return tree_->at(*e.groundTruthLeaf);
}

bool SimulatedOracle::genusOf(const Hierarchy& h, const Encounter& e, NodeId n) {
  return tree_->isAncestorOrSelf(correspondent(h, n), leafOf(e));
}

bool SimulatedOracle::sameObject(const Hierarchy& h, const Encounter& e,
                                 NodeId n) {
  return correspondent(h, n) == leafOf(e);
}

bool SimulatedOracle::sharesGenusBelow(const Hierarchy& h, const Encounter& e,
                                       NodeId sibling, NodeId under) {
  const GtIndex lca =
      tree_->lowestCommonAncestor(correspondent(h, sibling), leafOf(e));
  const GtIndex top = correspondent(h, under);
  return lca != top && tree_->isAncestorOrSelf(top, lca);
}

std::optional<std::string> SimulatedOracle::objectAnnotation(
    const Encounter& e) const {
  return tree_->node(leafOf(e)).label;
}

std::optional<std::string> SimulatedOracle::intermediateAnnotation(
    const Hierarchy& h, NodeId reparentedChild, const Encounter& e) const {
  const GtIndex lca =
      tree_->lowestCommonAncestor(correspondent(h, reparentedChild), leafOf(e));
  return tree_->node(lca).label;
}

std::vector<std::string> consistencyViolations(const Hierarchy& h,
                                               const GroundTruthTree& tree) {
  std::vector<std::string> problems;
  std::vector<std::optional<GtIndex>> corr(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& label = h.node(NodeId{i}).annotation;
    if (!label) {
      problems.push_back("node " + std::to_string(i) + " is unannotated");
    } else if (auto g = tree.find(*label)) {
      corr[i] = *g;
    } else {
      problems.push_back("node " + std::to_string(i) + " maps to unknown '" +
                         *label + "'");
    }
  }
  if (corr[0] && *corr[0] != tree.root()) {
    problems.push_back("machine root does not map to the ground-truth root");
  }
  for (std::size_t i = 0; i < h.size(); ++i) {
    const NodeId n{i};
    const auto& node = h.node(n);
    if (node.parent && corr[i] && corr[node.parent->value]) {
      const GtIndex p = *corr[node.parent->value];
      if (p == *corr[i] || !tree.isAncestorOrSelf(p, *corr[i])) {
        problems.push_back("node " + std::to_string(i) +
                           " is not strictly below its parent's correspondent");
      }
    }
    std::set<GtIndex> seen;
    for (NodeId c : node.children) {
      if (corr[c.value] && !seen.insert(*corr[c.value]).second) {
        problems.push_back("children of node " + std::to_string(i) +
                           " share a correspondent");
      }
    }
    for (const auto& eid : node.encounters) {
      const auto& e = h.encounter(eid);
      const auto leaf = e.groundTruthLeaf ? tree.find(*e.groundTruthLeaf)
                                          : std::optional<GtIndex>{};
      if (!leaf || !corr[i] || !tree.isAncestorOrSelf(*corr[i], *leaf)) {
        problems.push_back("encounter '" + eid + "' misplaced at node " +
                           std::to_string(i));
      }
    }
  }
  return problems;
}

}  // namespace gd

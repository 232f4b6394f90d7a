#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gd/hierarchy.hpp"
#include "gd/model.hpp"
#include "gd/synthetic.hpp"

namespace gd {

enum class QueryKind { Genus, SameObject, SharesGenusBelow };

std::string_view to_string(QueryKind kind);
QueryKind queryKindFromString(std::string_view name);

/// A question about encounter `encounter`:
///   Genus            is `subject` a genus of the encounter?
///   SameObject       is the encounter the object held at `subject`?
///   SharesGenusBelow does the encounter share with `subject` a genus
///                    strictly below `under`?
struct Query {
  QueryKind kind = QueryKind::Genus;
  EncounterId encounter;
  NodeId subject;
  std::optional<NodeId> under;

  bool operator==(const Query&) const = default;
};

nlohmann::json toJson(const Query& query);

/// Supplies labels for nodes created by a placement.
class Annotator {
 public:
  virtual ~Annotator() = default;
  virtual std::optional<std::string> objectAnnotation(const Encounter& e) const;
  virtual std::optional<std::string> intermediateAnnotation(
      const Hierarchy& h, NodeId reparentedChild, const Encounter& e) const;
};

/// Labels new nodes from the encounter's ground-truth path: a new object
/// gets the encounter's leaf, a new intermediate gets the common path
/// prefix of the reparented child's label and the leaf.
class GroundTruthAnnotator : public Annotator {
 public:
  std::optional<std::string> objectAnnotation(const Encounter& e) const override;
  std::optional<std::string> intermediateAnnotation(
      const Hierarchy& h, NodeId reparentedChild,
      const Encounter& e) const override;
};

/// Answers genus/differentia questions. Implementations may throw
/// OracleUnavailable; answers must be consistent for repeated questions.
class Oracle : public Annotator {
 public:
  virtual bool genusOf(const Hierarchy& h, const Encounter& e, NodeId n) = 0;
  virtual bool sameObject(const Hierarchy& h, const Encounter& e, NodeId n) = 0;
  virtual bool sharesGenusBelow(const Hierarchy& h, const Encounter& e,
                                NodeId sibling, NodeId under) = 0;
};

bool ask(Oracle& oracle, const Hierarchy& h, const Encounter& e,
         const Query& query);

/// Stand-in user that answers from the ground-truth tree, reading each
/// machine node's correspondent from its annotation.
class SimulatedOracle : public Oracle {
 public:
  explicit SimulatedOracle(const GroundTruthTree& tree) : tree_(&tree) {}

  bool genusOf(const Hierarchy& h, const Encounter& e, NodeId n) override;
  bool sameObject(const Hierarchy& h, const Encounter& e, NodeId n) override;
  bool sharesGenusBelow(const Hierarchy& h, const Encounter& e, NodeId sibling,
                        NodeId under) override;

  std::optional<std::string> objectAnnotation(const Encounter& e) const override;
  std::optional<std::string> intermediateAnnotation(
      const Hierarchy& h, NodeId reparentedChild,
      const Encounter& e) const override;

  /// Ground-truth node of a machine node; ConsistencyError if unmapped.
  GtIndex correspondent(const Hierarchy& h, NodeId n) const;
  GtIndex leafOf(const Encounter& e) const;

  const GroundTruthTree& tree() const noexcept { return *tree_; }

 private:
  const GroundTruthTree* tree_;
};

/// Homomorphism check of a machine hierarchy against the ground truth:
/// every node mapped, root to root, each parent's correspondent a proper
/// ancestor of its child's, siblings mapped to distinct nodes, and every
/// held encounter lying under its node's correspondent. Returns one message
/// per violation.
std::vector<std::string> consistencyViolations(const Hierarchy& h,
                                               const GroundTruthTree& tree);

}  // namespace gd

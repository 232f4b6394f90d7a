#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gd/model.hpp"
#include "gd/random.hpp"

namespace gd {

struct GeneratorConfig {
  int depth = 4;
  int branching = 3;
  int encountersPerLeaf = 5;
  int dimension = 32;
  /// Per-level standard deviation of a child prototype's offset from its
  /// parent. Empty means "halve per level starting from 8".
  std::vector<double> levelOffsetScales{8.0, 4.0, 2.0, 1.0};
  double viewNoiseSigma = 0.25;
  std::uint64_t seed = 0;

  /// Offset scales with the empty-means-default rule applied.
  std::vector<double> resolvedScales() const;

  /// Throws InvalidInput naming the offending field.
  void validate() const;
};

using GtIndex = std::size_t;

struct GroundTruthNode {
  std::string label;  // '/'-separated path from the root, e.g. "root/2/0"
  Embedding prototype;
  std::optional<GtIndex> parent;
  std::vector<GtIndex> children;
  int depth = 0;
};

/// The user's hierarchy. Node labels are root paths, so the lowest common
/// ancestor of two labels is their longest common path prefix.
class GroundTruthTree {
 public:
  GroundTruthTree() = default;

  /// Builds the tree implied by a set of '/'-separated leaf paths sharing
  /// one first component. Prototypes are left empty.
  static GroundTruthTree fromLeafLabels(const std::vector<std::string>& labels);

  GtIndex root() const noexcept { return 0; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const GroundTruthNode& node(GtIndex i) const { return nodes_.at(i); }
  const std::vector<GroundTruthNode>& nodes() const noexcept { return nodes_; }

  std::optional<GtIndex> find(std::string_view label) const;
  /// Like find but throws ConsistencyError for unknown labels.
  GtIndex at(std::string_view label) const;

  std::vector<GtIndex> leaves() const;
  bool isAncestorOrSelf(GtIndex ancestor, GtIndex node) const;
  GtIndex lowestCommonAncestor(GtIndex a, GtIndex b) const;

  /// Appends a node; returns its index. Used by the generator and loaders.
  GtIndex addNode(std::optional<GtIndex> parent, Embedding prototype);

 private:
  std::vector<GroundTruthNode> nodes_;
  std::unordered_map<std::string, GtIndex> byLabel_;
};

/// Longest common prefix of two label paths, by whole components.
std::string commonLabelPrefix(std::string_view a, std::string_view b);

/// True when `ancestor` is `label` or a component-wise prefix of it.
bool labelIsAncestorOrSelf(std::string_view ancestor, std::string_view label);

GroundTruthTree generateTree(const GeneratorConfig& config);

/// One sighting of `leaf`: one noisy view per node on the root-exclusive
/// path from the root to the leaf, in shuffled order.
Encounter generateEncounter(const GroundTruthTree& tree,
                            const GeneratorConfig& config, GtIndex leaf,
                            Rng& rng, EncounterId id, VisualObjectId firstId);

struct Dataset {
  GroundTruthTree tree;
  std::vector<Encounter> encounters;
};

/// Tree plus `encountersPerLeaf` encounters for every leaf. Each encounter
/// draws from its own stream keyed by its index.
Dataset generateDataset(const GeneratorConfig& config);

/// A dataset from loaded encounters whose ground-truth labels define the
/// tree. Throws InvalidInput if any encounter lacks a label.
Dataset datasetFromEncounters(std::vector<Encounter> encounters);

}  // namespace gd

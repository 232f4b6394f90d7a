#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "gd/evm.hpp"
#include "gd/hierarchy.hpp"
#include "gd/model.hpp"

namespace gd {

struct Prediction {
  NodeId node;
  double probability = 1.0;

  bool operator==(const Prediction&) const = default;
};

/// One step of a descent: the best child at that level and its probability.
/// The last step of a trace is the rejected candidate when descent stopped
/// on the threshold rather than at a leaf.
struct TraceStep {
  NodeId node;
  double probability = 0.0;
  bool accepted = false;
};

struct SupervisionRecord {
  VisualObject visualObject;
  NodeId confirmedNode;
  std::vector<TraceStep> predictionTrace;
};

/// Append-only log of confirmed placements, one record per visual object.
class SupervisionMemory {
 public:
  void append(SupervisionRecord record) { records_.push_back(std::move(record)); }
  const std::vector<SupervisionRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

 private:
  std::vector<SupervisionRecord> records_;
};

inline constexpr double kDefaultRejectionThreshold = 0.5;

/// EVM model of `child` against its siblings: positives are the child's
/// subtree visual objects, negatives the union of its siblings' subtrees.
/// Throws PreconditionError for the root.
EvmClassModel buildChildModel(const Hierarchy& h, NodeId child,
                              const EvmConfig& config);

/// Best child path from the root, followed to a leaf regardless of any
/// threshold. probabilities[i] belongs to nodes[i + 1]; nodes[0] is the root.
struct GreedyChain {
  std::vector<NodeId> nodes;
  std::vector<double> probabilities;
};

/// Genus prediction over a hierarchy. Child models are cached per node and
/// reused while the parent's subtree stamp is unchanged, i.e. until the
/// child's own subtree or one of its siblings' changes.
class Recognizer {
 public:
  explicit Recognizer(EvmConfig config = {});
  Recognizer(const Recognizer&) = delete;
  Recognizer& operator=(const Recognizer&) = delete;

  const EvmConfig& config() const noexcept { return config_; }

  std::shared_ptr<const EvmClassModel> childModel(const Hierarchy& h,
                                                  NodeId child) const;
  double childProbability(const Hierarchy& h, NodeId child,
                          const VisualObject& v) const;

  /// Descends from `start` into the most probable child while its
  /// probability is strictly above `threshold`. Equal probabilities go to
  /// the lowest node id.
  Prediction predictVOGenus(const Hierarchy& h, const VisualObject& v,
                            NodeId start, double startProbability,
                            double threshold,
                            std::vector<TraceStep>* trace = nullptr) const;

  /// Runs predictVOGenus from (root, 1.0) for every visual object and keeps
  /// the current candidate unless it is the root or a later visual object
  /// reports a higher probability. Optionally returns one trace per visual
  /// object.
  Prediction predictGenus(const Hierarchy& h, const Encounter& e,
                          double threshold,
                          std::vector<std::vector<TraceStep>>* traces = nullptr) const;

  GreedyChain greedyChain(const Hierarchy& h, const VisualObject& v) const;

  /// Threshold maximizing the number of records whose replayed prediction
  /// equals their confirmed node; lowest such candidate on ties. Empty
  /// memory gives kDefaultRejectionThreshold.
  double rejectionThreshold(const SupervisionMemory& memory,
                            const Hierarchy& h) const;

  /// Replay accuracy (exact confirmed-node hits) of a fixed threshold.
  std::size_t replayHits(const SupervisionMemory& memory, const Hierarchy& h,
                         double threshold) const;

  std::size_t cachedModels() const;

 private:
  struct FitState;
  struct CacheEntry {
    NodeId parent;
    std::uint64_t parentStamp = 0;
    std::shared_ptr<const EvmClassModel> model;
    // Margin tails behind `model`, reused when a later fit of the same
    // child only gained positives or negatives.
    std::shared_ptr<const FitState> state;
  };

  std::pair<std::shared_ptr<const EvmClassModel>, std::shared_ptr<const FitState>>
  fitChild(const Hierarchy& h, NodeId child, const FitState* previous) const;

  // Returns the best child and its probability; `children` is non-empty.
  std::pair<NodeId, double> bestChild(const Hierarchy& h,
                                      const std::vector<NodeId>& children,
                                      const VisualObject& v) const;

  EvmConfig config_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<NodeId, CacheEntry> cache_;
};

}  // namespace gd

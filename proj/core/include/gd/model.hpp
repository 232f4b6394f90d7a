#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gd {

using VisualObjectId = std::uint64_t;
using EncounterId = std::string;

/// A point in the embedding space. Always non-empty with finite entries.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<double> values);

  static Embedding zeros(std::size_t dimension);

  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  bool operator==(const Embedding&) const = default;

 private:
  std::vector<double> values_;
};

/// Euclidean distance. Throws InvalidInput on dimension mismatch.
double distance(const Embedding& a, const Embedding& b);

// Unchecked kernels used by the hot loops; callers guarantee equal sizes.
double squaredDistance(std::span<const double> a,
                       std::span<const double> b) noexcept;

/// Squared distance that gives up once the running sum exceeds `bound`.
/// The return value is exact when it is <= bound and otherwise only
/// guaranteed to be > bound.
double squaredDistanceBounded(std::span<const double> a,
                              std::span<const double> b,
                              double bound) noexcept;

struct FrameSpan {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive

  bool operator==(const FrameSpan&) const = default;
};

struct VisualObject {
  VisualObjectId id = 0;
  Embedding embedding;
  FrameSpan frames;
  EncounterId encounterId;

  bool operator==(const VisualObject&) const = default;
};

struct Encounter {
  EncounterId id;
  std::vector<VisualObject> visualObjects;
  /// Ground-truth leaf label ("root/1/0/2/1"). Only the simulated oracle
  /// and annotators look at it.
  std::optional<std::string> groundTruthLeaf;

  std::size_t dimension() const;

  bool operator==(const Encounter&) const = default;
};

/// Checks the Encounter invariants: non-empty, consistent dimension,
/// contiguous non-overlapping frame spans, owner ids set.
void validateEncounter(const Encounter& encounter);

/// Splits a frame sequence into visual objects. A new visual object starts
/// when a frame lies farther than `similarityThreshold` from the running
/// centroid of the current one. Visual object ids are assigned
/// consecutively from `firstId`.
Encounter segmentEncounter(std::span<const Embedding> frames,
                           double similarityThreshold,
                           EncounterId id = "e0",
                           VisualObjectId firstId = 0);

}  // namespace gd

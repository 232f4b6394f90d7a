#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gd/model.hpp"
#include "gd/weibull.hpp"

namespace gd {

struct ExtremeVector {
  Embedding embedding;
  WeibullModel weibull;
  VisualObjectId sourceVisualObjectId = 0;
};

struct EvmConfig {
  /// Number of smallest margins each Weibull is fitted on, clipped to the
  /// number of negatives.
  std::size_t tailSize = 16;
  /// Scale of the shape-1 model assigned when a class has no negatives.
  double openSpaceScale = 10.0;
  /// Margins below this are raised to it so duplicated points across
  /// classes still give a valid (very steep) model.
  double minMargin = 1e-12;
};

/// A class represented by its extreme vectors, each with its own Weibull
/// model of the margin to other classes. Extreme vectors are kept sorted by
/// source visual object id.
class EvmClassModel {
 public:
  EvmClassModel(std::vector<ExtremeVector> extremeVectors, std::size_t tailSize);

  const std::vector<ExtremeVector>& extremeVectors() const noexcept {
    return extremeVectors_;
  }
  std::size_t tailSize() const noexcept { return tailSize_; }
  std::size_t dimension() const noexcept { return dimension_; }

  /// Index of the extreme vector closest to x; ties go to the lowest source
  /// id. Writes the Euclidean distance to `distanceOut` when given.
  std::size_t nearest(std::span<const double> x,
                      double* distanceOut = nullptr) const;

  /// exp(-(d/scale)^shape) using the nearest extreme vector only.
  double inclusionProbability(std::span<const double> x) const;

 private:
  // Extreme vectors are bucketed around a few of themselves so a query can
  // skip buckets whose ball lies farther than the best distance so far.
  struct Bucket {
    std::size_t center = 0;
    double radius = 0.0;
    std::size_t begin = 0;  // range into order_
    std::size_t end = 0;
  };

  void buildBuckets();

  std::vector<ExtremeVector> extremeVectors_;
  std::vector<double> packed_;  // rows in order_ sequence
  std::vector<std::size_t> order_;
  std::vector<Bucket> buckets_;
  std::size_t dimension_ = 0;
  std::size_t tailSize_ = 0;
};

/// The up-to-`tailSize` smallest half-distances from `positive` to the
/// negatives, ascending, each raised to at least `minMargin`.
std::vector<double> marginTail(const VisualObject& positive,
                               std::span<const VisualObject* const> negatives,
                               std::size_t tailSize, double minMargin = 1e-12);

/// Every positive becomes an extreme vector whose Weibull is fitted on its
/// margin tail against the negatives; with no negatives every extreme
/// vector gets {shape 1, config.openSpaceScale}.
EvmClassModel fitClassModel(std::span<const VisualObject* const> positives,
                            std::span<const VisualObject* const> negatives,
                            const EvmConfig& config = {});

EvmClassModel fitClassModel(const std::vector<VisualObject>& positives,
                            const std::vector<VisualObject>& negatives,
                            const EvmConfig& config = {});

double inclusionProbability(const EvmClassModel& model, const Embedding& x);

}  // namespace gd

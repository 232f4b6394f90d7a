#include "gd/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "gd/errors.hpp"

namespace gd {

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw InvalidInput("embedding must have at least one coordinate");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw InvalidInput("embedding coordinates must be finite");
    }
  }
}

Embedding Embedding::zeros(std::size_t dimension) {
  return Embedding(std::vector<double>(dimension, 0.0));
}

double squaredDistance(std::span<const double> a,
                       std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double squaredDistanceBounded(std::span<const double> a,
                              std::span<const double> b,
                              double bound) noexcept {
  constexpr std::size_t kBlock = 8;
  const std::size_t n = a.size();
  double sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    const std::size_t end = std::min(n, i + kBlock);
    for (; i < end; ++i) {
      const double d = a[i] - b[i];
      sum += d * d;
    }
    if (sum > bound) return sum;
  }
  return sum;
}

double distance(const Embedding& a, const Embedding& b) {
  if (a.dimension() != b.dimension()) {
    throw InvalidInput("dimension mismatch: " + std::to_string(a.dimension()) +
                       " vs " + std::to_string(b.dimension()));
  }
  return std::sqrt(squaredDistance(a.values(), b.values()));
}

std::size_t Encounter::dimension() const {
  return visualObjects.empty() ? 0 : visualObjects.front().embedding.dimension();
}

void validateEncounter(const Encounter& encounter) {
  if (encounter.visualObjects.empty()) {
    throw InvalidInput("encounter '" + encounter.id + "' has no visual objects");
  }
  const std::size_t dim = encounter.dimension();
  std::size_t expectedFirst = encounter.visualObjects.front().frames.first;
  for (const auto& vo : encounter.visualObjects) {
    if (vo.embedding.dimension() != dim || dim == 0) {
      throw InvalidInput("encounter '" + encounter.id +
                         "' mixes embedding dimensions");
    }
    if (vo.frames.first > vo.frames.last) {
      throw InvalidInput("visual object frame span is reversed");
    }
    if (vo.frames.first != expectedFirst) {
      throw InvalidInput("encounter '" + encounter.id +
                         "' frame spans are not contiguous");
    }
    if (vo.encounterId != encounter.id) {
      throw InvalidInput("visual object owned by '" + vo.encounterId +
                         "' listed under encounter '" + encounter.id + "'");
    }
    expectedFirst = vo.frames.last + 1;
  }
}

namespace {

VisualObject closeSegment(const std::vector<double>& sum, std::size_t count,
                          FrameSpan span, VisualObjectId id,
                          const EncounterId& owner) {
  std::vector<double> centroid(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i) {
    centroid[i] = sum[i] / static_cast<double>(count);
  }
  return VisualObject{id, Embedding(std::move(centroid)), span, owner};
}

}  // namespace

Encounter segmentEncounter(std::span<const Embedding> frames,
                           double similarityThreshold, EncounterId id,
                           VisualObjectId firstId) {
  if (frames.empty()) {
    throw InvalidInput("cannot segment an empty frame sequence");
  }
  if (!(similarityThreshold > 0.0)) {
    throw InvalidInput("similarity threshold must be positive");
  }
  const std::size_t dim = frames.front().dimension();
  for (const auto& f : frames) {
    if (f.dimension() != dim) {
      throw InvalidInput("frame dimension mismatch");
    }
  }

  Encounter encounter;
  encounter.id = std::move(id);
  VisualObjectId nextId = firstId;

  std::vector<double> sum(frames.front().values().begin(),
                          frames.front().values().end());
  std::size_t count = 1;
  std::size_t start = 0;
  std::vector<double> centroid(dim);

  for (std::size_t t = 1; t < frames.size(); ++t) {
    for (std::size_t i = 0; i < dim; ++i) {
      centroid[i] = sum[i] / static_cast<double>(count);
    }
    const double d = std::sqrt(squaredDistance(frames[t].values(), centroid));
    if (d > similarityThreshold) {
      encounter.visualObjects.push_back(
          closeSegment(sum, count, {start, t - 1}, nextId++, encounter.id));
      sum.assign(frames[t].values().begin(), frames[t].values().end());
      count = 1;
      start = t;
    } else {
      for (std::size_t i = 0; i < dim; ++i) sum[i] += frames[t][i];
      ++count;
    }
  }
  encounter.visualObjects.push_back(closeSegment(
      sum, count, {start, frames.size() - 1}, nextId, encounter.id));
  return encounter;
}

}  // namespace gd

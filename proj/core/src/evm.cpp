#include "gd/evm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>

#include "gd/errors.hpp"

namespace gd {

EvmClassModel::EvmClassModel(std::vector<ExtremeVector> extremeVectors,
                             std::size_t tailSize)
    : extremeVectors_(std::move(extremeVectors)), tailSize_(tailSize) {
  if (extremeVectors_.empty()) {
    throw InvalidInput("an EVM class needs at least one extreme vector");
  }
  std::sort(extremeVectors_.begin(), extremeVectors_.end(),
            [](const ExtremeVector& a, const ExtremeVector& b) {
              return a.sourceVisualObjectId < b.sourceVisualObjectId;
            });
  dimension_ = extremeVectors_.front().embedding.dimension();
  for (const auto& ev : extremeVectors_) {
    if (ev.embedding.dimension() != dimension_) {
      throw InvalidInput("extreme vectors mix dimensions");
    }
    const auto& w = ev.weibull;
    if (!(w.shape > 0.0) || !(w.scale > 0.0) || !std::isfinite(w.shape) ||
        !std::isfinite(w.scale)) {
      throw InvalidInput("extreme vector has an invalid Weibull model");
    }
  }
  buildBuckets();
}

void EvmClassModel::buildBuckets() {
  const std::size_t n = extremeVectors_.size();
  constexpr std::size_t kLinearBelow = 48;
  std::vector<std::size_t> bucketOf(n, 0);
  if (n < kLinearBelow) {
    buckets_.push_back(Bucket{0, 0.0, 0, n});
  } else {
    const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(double(n))));
    for (std::size_t b = 0; b < k; ++b) buckets_.push_back(Bucket{b * n / k});
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = extremeVectors_[i].embedding.values();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < k; ++b) {
        const double d = squaredDistanceBounded(
            x, extremeVectors_[buckets_[b].center].embedding.values(), best);
        if (d < best) {
          best = d;
          bucketOf[i] = b;
        }
      }
      auto& bucket = buckets_[bucketOf[i]];
      bucket.radius = std::max(bucket.radius, std::sqrt(best));
    }
  }
  order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) order_[i] = i;
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return bucketOf[a] < bucketOf[b];
  });
  for (std::size_t pos = 0; pos < n;) {
    auto& bucket = buckets_[bucketOf[order_[pos]]];
    bucket.begin = pos;
    while (pos < n && &buckets_[bucketOf[order_[pos]]] == &bucket) ++pos;
    bucket.end = pos;
  }
  std::erase_if(buckets_, [](const Bucket& b) { return b.begin == b.end; });
  packed_.reserve(dimension_ * n);
  for (std::size_t i : order_) {
    const auto v = extremeVectors_[i].embedding.values();
    packed_.insert(packed_.end(), v.begin(), v.end());
  }
}

std::size_t EvmClassModel::nearest(std::span<const double> x,
                                   double* distanceOut) const {
  if (x.size() != dimension_) {
    throw InvalidInput("query dimension does not match the class model");
  }
  const std::span<const double> rows(packed_);
  std::size_t best = 0;
  double bestSq = std::numeric_limits<double>::infinity();
  auto scan = [&](const Bucket& b) {
    for (std::size_t pos = b.begin; pos < b.end; ++pos) {
      const double d =
          squaredDistanceBounded(x, rows.subspan(pos * dimension_, dimension_), bestSq);
      if (d < bestSq || (d == bestSq && order_[pos] < best)) {
        bestSq = d;
        best = order_[pos];
      }
    }
  };

  if (buckets_.size() == 1) {
    scan(buckets_.front());
  } else {
    // Lower bound on the distance to anything in a bucket, by the triangle
    // inequality around its center.
    std::vector<std::pair<double, std::size_t>> bounds;
    bounds.reserve(buckets_.size());
    for (std::size_t b = 0; b < buckets_.size(); ++b) {
      const auto c = extremeVectors_[buckets_[b].center].embedding.values();
      const double dc = std::sqrt(squaredDistance(x, c));
      bounds.emplace_back(dc - buckets_[b].radius - 1e-9 * (dc + buckets_[b].radius),
                          b);
    }
    std::sort(bounds.begin(), bounds.end());
    for (const auto& [lb, b] : bounds) {
      if (lb > 0.0 && lb * lb > bestSq) break;
      scan(buckets_[b]);
    }
  }
  if (distanceOut) *distanceOut = std::sqrt(bestSq);
  return best;
}

double EvmClassModel::inclusionProbability(std::span<const double> x) const {
  double d = 0.0;
  const std::size_t i = nearest(x, &d);
  return extremeVectors_[i].weibull.survival(d);
}

std::vector<double> marginTail(const VisualObject& positive,
                               std::span<const VisualObject* const> negatives,
                               std::size_t tailSize, double minMargin) {
  const std::size_t keep = std::min(tailSize, negatives.size());
  std::vector<double> tail;
  if (keep == 0) return tail;
  // Max-heap of the `keep` smallest squared distances seen so far.
  std::priority_queue<double> heap;
  const auto p = positive.embedding.values();
  for (const VisualObject* neg : negatives) {
    const auto q = neg->embedding.values();
    if (heap.size() < keep) {
      heap.push(squaredDistance(p, q));
    } else {
      const double d = squaredDistanceBounded(p, q, heap.top());
      if (d < heap.top()) {
        heap.pop();
        heap.push(d);
      }
    }
  }
  tail.reserve(keep);
  while (!heap.empty()) {
    tail.push_back(std::max(0.5 * std::sqrt(heap.top()), minMargin));
    heap.pop();
  }
  std::reverse(tail.begin(), tail.end());
  return tail;
}

EvmClassModel fitClassModel(std::span<const VisualObject* const> positives,
                            std::span<const VisualObject* const> negatives,
                            const EvmConfig& config) {
  if (positives.empty()) throw InvalidInput("fitClassModel needs positives");
  if (config.tailSize == 0) throw InvalidInput("tail size must be positive");
  const std::size_t dim = positives.front()->embedding.dimension();
  for (const auto* v : positives) {
    if (v->embedding.dimension() != dim) {
      throw InvalidInput("positives mix dimensions");
    }
  }
  for (const auto* v : negatives) {
    if (v->embedding.dimension() != dim) {
      throw InvalidInput("negatives do not match the positives' dimension");
    }
  }

  std::vector<ExtremeVector> evs;
  evs.reserve(positives.size());
  for (const auto* pos : positives) {
    WeibullModel w{1.0, config.openSpaceScale};
    if (!negatives.empty()) {
      w = fitWeibull(marginTail(*pos, negatives, config.tailSize,
                                config.minMargin));
    }
    evs.push_back(ExtremeVector{pos->embedding, w, pos->id});
  }
  return EvmClassModel(std::move(evs), config.tailSize);
}

EvmClassModel fitClassModel(const std::vector<VisualObject>& positives,
                            const std::vector<VisualObject>& negatives,
                            const EvmConfig& config) {
  std::vector<const VisualObject*> pos, neg;
  for (const auto& v : positives) pos.push_back(&v);
  for (const auto& v : negatives) neg.push_back(&v);
  return fitClassModel(pos, neg, config);
}

double inclusionProbability(const EvmClassModel& model, const Embedding& x) {
  return model.inclusionProbability(x.values());
}

}  // namespace gd

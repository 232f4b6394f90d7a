#include "gd/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

#include "gd/errors.hpp"

namespace gd {

EvmClassModel buildChildModel(const Hierarchy& h, NodeId child,
                              const EvmConfig& config) {
  const NodeId parent = h.parentOf(child);
  const auto positives = h.subtreeVisualObjects(child);
  std::vector<const VisualObject*> negatives;
  for (NodeId sibling : h.childrenOf(parent)) {
    if (sibling == child) continue;
    const auto vs = h.subtreeVisualObjects(sibling);
    negatives.insert(negatives.end(), vs.begin(), vs.end());
  }
  if (positives.empty()) {
    throw ConsistencyError("node " + to_string(child) +
                           " has no visual objects in its subtree");
  }
  return fitClassModel(positives, negatives, config);
}

Recognizer::Recognizer(EvmConfig config) : config_(config) {}

struct Recognizer::FitState {
  // Both sorted by address; holding the encounters keeps addresses unique.
  std::vector<EncounterPtr> positives;
  std::vector<EncounterPtr> negatives;
  // Positive visual objects sorted by address, with their ascending
  // squared-distance tails and fitted models.
  std::vector<const VisualObject*> objects;
  std::vector<std::vector<double>> tails;
  std::vector<WeibullModel> models;
};

namespace {

bool byAddress(const EncounterPtr& a, const EncounterPtr& b) {
  return a.get() < b.get();
}

void insertIntoTail(std::vector<double>& tail, double d, std::size_t keep) {
  if (tail.size() == keep && !(d < tail.back())) return;
  tail.insert(std::upper_bound(tail.begin(), tail.end(), d), d);
  if (tail.size() > keep) tail.pop_back();
}

void mergeTail(std::vector<double>& tail, const VisualObject& positive,
               const std::vector<const VisualObject*>& negatives,
               std::size_t keep) {
  const auto p = positive.embedding.values();
  for (const VisualObject* neg : negatives) {
    const double bound = tail.size() < keep
                             ? std::numeric_limits<double>::infinity()
                             : tail.back();
    insertIntoTail(tail, squaredDistanceBounded(p, neg->embedding.values(), bound),
                   keep);
  }
}

WeibullModel fitTail(const std::vector<double>& tail, const EvmConfig& config) {
  if (tail.empty()) return WeibullModel{1.0, config.openSpaceScale};
  std::vector<double> margins;
  margins.reserve(tail.size());
  for (double sq : tail) margins.push_back(std::max(0.5 * std::sqrt(sq), config.minMargin));
  return fitWeibull(margins);
}

void appendObjects(std::vector<const VisualObject*>& out, const Encounter& e) {
  for (const auto& v : e.visualObjects) out.push_back(&v);
}

}  // namespace

// Produces exactly what buildChildModel would. When `previous` covered a
// subset of the current positives and negatives, old positives only see
// the added negatives and keep their Weibull if their tail is unchanged.
std::pair<std::shared_ptr<const EvmClassModel>,
          std::shared_ptr<const Recognizer::FitState>>
Recognizer::fitChild(const Hierarchy& h, NodeId child,
                     const FitState* previous) const {
  const NodeId parent = h.parentOf(child);
  auto state = std::make_shared<FitState>();
  const auto positivesInOrder = h.subtreeEncounters(child);
  state->positives = positivesInOrder;
  for (NodeId sibling : h.childrenOf(parent)) {
    if (sibling == child) continue;
    const auto es = h.subtreeEncounters(sibling);
    state->negatives.insert(state->negatives.end(), es.begin(), es.end());
  }
  if (positivesInOrder.empty()) {
    throw ConsistencyError("node " + to_string(child) +
                           " has no visual objects in its subtree");
  }
  std::sort(state->positives.begin(), state->positives.end(), byAddress);
  std::sort(state->negatives.begin(), state->negatives.end(), byAddress);

  const bool extend =
      previous &&
      std::includes(state->positives.begin(), state->positives.end(),
                    previous->positives.begin(), previous->positives.end(),
                    byAddress) &&
      std::includes(state->negatives.begin(), state->negatives.end(),
                    previous->negatives.begin(), previous->negatives.end(),
                    byAddress);

  std::vector<const VisualObject*> allNegatives;
  for (const auto& e : state->negatives) appendObjects(allNegatives, *e);
  std::vector<const VisualObject*> addedNegatives;
  if (extend) {
    std::vector<EncounterPtr> added;
    std::set_difference(state->negatives.begin(), state->negatives.end(),
                        previous->negatives.begin(), previous->negatives.end(),
                        std::back_inserter(added), byAddress);
    for (const auto& e : added) appendObjects(addedNegatives, *e);
  }
  const std::size_t keep = std::min(config_.tailSize, allNegatives.size());

  std::vector<const VisualObject*> objects;
  for (const auto& e : positivesInOrder) appendObjects(objects, *e);
  std::vector<ExtremeVector> evs;
  evs.reserve(objects.size());
  std::vector<std::vector<double>> tails(objects.size());
  std::vector<WeibullModel> models(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const VisualObject* v = objects[i];
    bool reused = false;
    if (extend) {
      const auto it = std::lower_bound(previous->objects.begin(),
                                       previous->objects.end(), v);
      if (it != previous->objects.end() && *it == v) {
        const auto j = static_cast<std::size_t>(it - previous->objects.begin());
        tails[i] = previous->tails[j];
        mergeTail(tails[i], *v, addedNegatives, keep);
        models[i] = tails[i] == previous->tails[j] ? previous->models[j]
                                                   : fitTail(tails[i], config_);
        reused = true;
      }
    }
    if (!reused) {
      mergeTail(tails[i], *v, allNegatives, keep);
      models[i] = fitTail(tails[i], config_);
    }
    evs.push_back(ExtremeVector{v->embedding, models[i], v->id});
  }

  std::vector<std::size_t> idx(objects.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return objects[a] < objects[b]; });
  for (std::size_t i : idx) {
    state->objects.push_back(objects[i]);
    state->tails.push_back(std::move(tails[i]));
    state->models.push_back(models[i]);
  }
  auto model = std::make_shared<const EvmClassModel>(std::move(evs), config_.tailSize);
  return {std::move(model), std::move(state)};
}

std::shared_ptr<const EvmClassModel> Recognizer::childModel(
    const Hierarchy& h, NodeId child) const {
  const NodeId parent = h.parentOf(child);
  const std::uint64_t stamp = h.stamp(parent);
  std::shared_ptr<const FitState> previous;
  {
    std::lock_guard lock(mutex_);
    const auto it = cache_.find(child);
    if (it != cache_.end()) {
      if (it->second.parent == parent && it->second.parentStamp == stamp) {
        return it->second.model;
      }
      previous = it->second.state;
    }
  }
  auto [model, state] = fitChild(h, child, previous.get());
  std::lock_guard lock(mutex_);
  cache_[child] = CacheEntry{parent, stamp, model, std::move(state)};
  return model;
}

double Recognizer::childProbability(const Hierarchy& h, NodeId child,
                                    const VisualObject& v) const {
  return childModel(h, child)->inclusionProbability(v.embedding.values());
}

std::pair<NodeId, double> Recognizer::bestChild(
    const Hierarchy& h, const std::vector<NodeId>& children,
    const VisualObject& v) const {
  NodeId best = children.front();
  double bestP = -1.0;
  for (NodeId c : children) {
    const double p = childProbability(h, c, v);
    if (p > bestP || (p == bestP && c < best)) {
      best = c;
      bestP = p;
    }
  }
  return {best, bestP};
}

Prediction Recognizer::predictVOGenus(const Hierarchy& h, const VisualObject& v,
                                      NodeId start, double startProbability,
                                      double threshold,
                                      std::vector<TraceStep>* trace) const {
  Prediction current{start, startProbability};
  h.node(start);
  while (true) {
    const auto& children = h.childrenOf(current.node);
    if (children.empty()) return current;
    const auto [child, p] = bestChild(h, children, v);
    const bool accept = p > threshold;
    if (trace) trace->push_back(TraceStep{child, p, accept});
    if (!accept) return current;
    current = Prediction{child, p};
  }
}

Prediction Recognizer::predictGenus(
    const Hierarchy& h, const Encounter& e, double threshold,
    std::vector<std::vector<TraceStep>>* traces) const {
  if (e.visualObjects.empty()) {
    throw InvalidInput("predictGenus needs a non-empty encounter");
  }
  Prediction best{h.root(), 1.0};
  for (const auto& v : e.visualObjects) {
    std::vector<TraceStep> trace;
    const Prediction p = predictVOGenus(h, v, h.root(), 1.0, threshold,
                                        traces ? &trace : nullptr);
    if (best.node == h.root() || best.probability < p.probability) best = p;
    if (traces) traces->push_back(std::move(trace));
  }
  return best;
}

GreedyChain Recognizer::greedyChain(const Hierarchy& h,
                                    const VisualObject& v) const {
  GreedyChain chain;
  chain.nodes.push_back(h.root());
  while (true) {
    const auto& children = h.childrenOf(chain.nodes.back());
    if (children.empty()) return chain;
    const auto [child, p] = bestChild(h, children, v);
    chain.nodes.push_back(child);
    chain.probabilities.push_back(p);
  }
}

namespace {

// Thresholds t for which the replayed prediction of a chain stops exactly
// at chain position j: every probability up to j is > t and the next one
// (if any) is <= t.
struct HitInterval {
  double lo;  // inclusive
  double hi;  // exclusive
};

std::optional<HitInterval> hitInterval(const GreedyChain& chain, NodeId target) {
  const auto it = std::find(chain.nodes.begin(), chain.nodes.end(), target);
  if (it == chain.nodes.end()) return std::nullopt;
  const auto j = static_cast<std::size_t>(it - chain.nodes.begin());
  HitInterval iv{-std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < j; ++i) {
    iv.hi = std::min(iv.hi, chain.probabilities[i]);
  }
  if (j < chain.probabilities.size()) iv.lo = chain.probabilities[j];
  if (!(iv.lo < iv.hi)) return std::nullopt;
  return iv;
}

}  // namespace

double Recognizer::rejectionThreshold(const SupervisionMemory& memory,
                                      const Hierarchy& h) const {
  if (memory.empty()) return kDefaultRejectionThreshold;

  std::vector<double> values{0.0, 1.0};
  std::vector<HitInterval> intervals;
  intervals.reserve(memory.size());
  for (const auto& record : memory.records()) {
    for (const auto& step : record.predictionTrace) {
      values.push_back(step.probability);
    }
    if (!h.contains(record.confirmedNode)) continue;
    const GreedyChain chain = greedyChain(h, record.visualObject);
    values.insert(values.end(), chain.probabilities.begin(),
                  chain.probabilities.end());
    if (auto iv = hitInterval(chain, record.confirmedNode)) {
      intervals.push_back(*iv);
    }
  }

  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> candidates{0.0};
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i] < 0.0 || values[i + 1] > 1.0) continue;
    candidates.push_back(0.5 * (values[i] + values[i + 1]));
  }
  candidates.push_back(1.0);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  // Count hits per candidate with a difference array over candidate indices.
  std::vector<long> delta(candidates.size() + 1, 0);
  for (const auto& iv : intervals) {
    const auto first = std::lower_bound(candidates.begin(), candidates.end(), iv.lo);
    const auto last = std::lower_bound(candidates.begin(), candidates.end(), iv.hi);
    delta[static_cast<std::size_t>(first - candidates.begin())] += 1;
    delta[static_cast<std::size_t>(last - candidates.begin())] -= 1;
  }
  long running = 0;
  long bestHits = -1;
  double best = candidates.front();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    running += delta[i];
    if (running > bestHits) {
      bestHits = running;
      best = candidates[i];
    }
  }
  return best;
}

std::size_t Recognizer::replayHits(const SupervisionMemory& memory,
                                   const Hierarchy& h, double threshold) const {
  std::size_t hits = 0;
  for (const auto& record : memory.records()) {
    const Prediction p =
        predictVOGenus(h, record.visualObject, h.root(), 1.0, threshold);
    if (p.node == record.confirmedNode) ++hits;
  }
  return hits;
}

std::size_t Recognizer::cachedModels() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

}  // namespace gd

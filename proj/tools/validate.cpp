#include "validate.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <string>

#include "gd/evm.hpp"
#include "gd/oracle.hpp"
#include "gd/random.hpp"
#include "gd/weibull.hpp"

namespace gd::tools {

namespace {

struct Check {
  std::string name;
  std::function<std::string()> run;  // empty string on success
};

std::string checkConsistency(const RunConfig& config, const Dataset& data,
                             const EvmConfig& evm) {
  std::string failure;
  for (int r = 0; r < config.runs && failure.empty(); ++r) {
    runOnce(config, data, evm, r,
            [&](std::size_t it, const Hierarchy& h, const PlacementOutcome&) {
              if (!failure.empty()) return;
              const auto problems = consistencyViolations(h, data.tree);
              if (!problems.empty()) {
                failure = "run " + std::to_string(r) + " iteration " +
                          std::to_string(it) + ": " + problems.front();
              }
            });
  }
  return failure;
}

std::string checkDeterminism(const RunConfig& config, const Dataset& data,
                             const EvmConfig& evm) {
  RunConfig small = config;
  small.runs = std::min(config.runs, 2);
  const auto a = formatCsv(aggregate(runAll(small, data, evm, 1)));
  const auto b = formatCsv(aggregate(runAll(small, data, evm, 1)));
  return a == b ? "" : "identical seeds gave different CSV output";
}

std::string checkGeodesic(std::uint64_t seed) {
  Rng rng(seed);
  for (int t = 0; t < 20; ++t) {
    Hierarchy h;
    const Encounter proto{"", {VisualObject{0, Embedding({0.0, 0.0}), {0, 0}, ""}}, {}};
    for (int i = 0; i < 30; ++i) {
      auto e = std::make_shared<Encounter>(proto);
      e->id = "e" + std::to_string(i);
      e->visualObjects[0].encounterId = e->id;
      e->visualObjects[0].id = static_cast<VisualObjectId>(i);
      h.addObjectNode(NodeId{rng.below(h.size())}, e);
    }
    // Breadth-first search over the undirected tree.
    for (std::size_t a = 0; a < h.size(); ++a) {
      std::vector<int> dist(h.size(), -1);
      std::deque<std::size_t> queue{a};
      dist[a] = 0;
      while (!queue.empty()) {
        const auto cur = queue.front();
        queue.pop_front();
        std::vector<NodeId> nbrs = h.childrenOf(NodeId{cur});
        if (cur != 0) nbrs.push_back(h.parentOf(NodeId{cur}));
        for (NodeId n : nbrs) {
          if (dist[n.value] < 0) {
            dist[n.value] = dist[cur] + 1;
            queue.push_back(n.value);
          }
        }
      }
      for (std::size_t b = 0; b < h.size(); ++b) {
        if (h.geodesicDistance(NodeId{a}, NodeId{b}) != dist[b]) {
          return "geodesic distance disagrees with BFS";
        }
      }
    }
  }
  return "";
}

std::string checkWeibull(std::uint64_t seed) {
  Rng rng(seed);
  for (int t = 0; t < 10; ++t) {
    const double shape = 0.5 + 3.0 * rng.uniform();
    const double scale = 0.5 + 5.0 * rng.uniform();
    std::vector<double> xs;
    for (int i = 0; i < 50; ++i) {
      const double u = rng.uniform();
      xs.push_back(scale * std::pow(-std::log(1.0 - u), 1.0 / shape));
    }
    const WeibullModel fit = fitWeibull(xs);
    double gridBest = -1e300;
    for (double k = 0.2; k <= 5.0; k += 0.01) {
      double s = 0.0;
      for (double x : xs) s += std::pow(x, k);
      const WeibullModel m{k, std::pow(s / double(xs.size()), 1.0 / k)};
      gridBest = std::max(gridBest, m.logLikelihood(xs));
    }
    if (fit.logLikelihood(xs) < gridBest - 1e-4) {
      return "Weibull fit below grid-search likelihood";
    }
  }
  return "";
}

std::string checkEvmBounds(std::uint64_t seed) {
  Rng rng(seed);
  for (int t = 0; t < 200; ++t) {
    std::vector<VisualObject> pos, neg;
    for (int i = 0; i < 4; ++i) {
      pos.push_back({VisualObjectId(i), Embedding({rng.normal(), rng.normal()}), {}, ""});
      neg.push_back({VisualObjectId(10 + i),
                     Embedding({3 + rng.normal(), rng.normal()}), {}, ""});
    }
    const auto model = fitClassModel(pos, neg);
    const Embedding x({4 * rng.normal(), 4 * rng.normal()});
    const double p = inclusionProbability(model, x);
    if (!(p >= 0.0 && p <= 1.0)) return "inclusion probability outside [0,1]";
    if (inclusionProbability(model, pos[0].embedding) != 1.0) {
      return "inclusion probability at an extreme vector is not 1";
    }
  }
  return "";
}

}  // namespace

int runValidation(const RunConfig& config, std::ostream& out) {
  const Dataset data = generateDataset(config.generator);
  const EvmConfig evm = evmConfigFor(config, data, true);
  const std::vector<Check> checks{
      {"hierarchy stays consistent with the ground truth",
       [&] { return checkConsistency(config, data, evm); }},
      {"identical seeds give identical CSV", [&] { return checkDeterminism(config, data, evm); }},
      {"geodesic distance matches BFS", [&] { return checkGeodesic(config.generator.seed); }},
      {"Weibull MLE matches grid search", [&] { return checkWeibull(config.generator.seed); }},
      {"EVM probabilities are bounded", [&] { return checkEvmBounds(config.generator.seed); }},
  };
  int failed = 0;
  for (const auto& c : checks) {
    std::string message;
    try {
      message = c.run();
    } catch (const std::exception& e) {
      message = std::string("exception: ") + e.what();
    }
    if (message.empty()) {
      out << "PASS  " << c.name << '\n';
    } else {
      out << "FAIL  " << c.name << ": " << message << '\n';
      ++failed;
    }
  }
  return failed;
}

}  // namespace gd::tools

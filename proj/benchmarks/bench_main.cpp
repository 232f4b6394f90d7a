#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "gd/evm.hpp"
#include "gd/experiment.hpp"
#include "gd/interaction.hpp"
#include "gd/oracle.hpp"
#include "gd/random.hpp"
#include "gd/recognition.hpp"
#include "gd/synthetic.hpp"
#include "gd/weibull.hpp"

namespace {

std::vector<double> weibullSamples(std::size_t n) {
  gd::Rng rng(1);
  std::vector<double> xs(n);
  for (double& x : xs) x = 2.0 * std::pow(-std::log(1 - rng.uniform()), 1 / 1.7);
  return xs;
}

std::vector<gd::VisualObject> cloud(gd::Rng& rng, std::size_t n, std::size_t d, double shift,
                                    gd::VisualObjectId first) {
  std::vector<gd::VisualObject> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (double& c : x) c = shift + rng.normal();
    out.push_back({first + i, gd::Embedding(x), {0, 0}, "e"});
  }
  return out;
}

// A hierarchy grown over the first `count` encounters of the default dataset.
struct Grown {
  gd::Dataset data;
  gd::Hierarchy h;
  gd::SupervisionMemory memory;
  gd::EvmConfig evm;
};

std::unique_ptr<Grown> grow(std::size_t count) {
  gd::GeneratorConfig g;
  auto out = std::make_unique<Grown>();
  out->data = gd::generateDataset(g);
  out->h = gd::Hierarchy(out->data.tree.node(out->data.tree.root()).label);
  out->evm.openSpaceScale = gd::defaultOpenSpaceScale(g);
  gd::Recognizer rec(out->evm);
  gd::SimulatedOracle oracle(out->data.tree);
  for (std::size_t i = 0; i < count; ++i) {
    gd::processEncounter(out->h, std::make_shared<const gd::Encounter>(out->data.encounters[i]),
                         oracle, out->memory, rec);
  }
  return out;
}

void BM_FitWeibull(benchmark::State& state) {
  const auto xs = weibullSamples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gd::fitWeibull(xs));
}
BENCHMARK(BM_FitWeibull)->Arg(16)->Arg(256);

void BM_FitClassModel(benchmark::State& state) {
  gd::Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pos = cloud(rng, n, 32, 0.0, 0);
  const auto neg = cloud(rng, 4 * n, 32, 1.5, 100000);
  gd::EvmConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(gd::fitClassModel(pos, neg, cfg));
}
BENCHMARK(BM_FitClassModel)->Arg(20)->Arg(100);

void BM_InclusionProbability(benchmark::State& state) {
  gd::Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = gd::fitClassModel(cloud(rng, n, 32, 0.0, 0), cloud(rng, n, 32, 1.5, n), {});
  const auto queries = cloud(rng, 64, 32, 0.5, 0);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gd::inclusionProbability(model, queries[i++ % queries.size()].embedding));
  }
}
BENCHMARK(BM_InclusionProbability)->Arg(32)->Arg(1024);

void BM_PredictGenus(benchmark::State& state) {
  const auto g = grow(static_cast<std::size_t>(state.range(0)));
  gd::Recognizer rec(g->evm);
  const double lambda = rec.rejectionThreshold(g->memory, g->h);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& e = g->data.encounters[i++ % g->data.encounters.size()];
    benchmark::DoNotOptimize(rec.predictGenus(g->h, e, lambda));
  }
}
BENCHMARK(BM_PredictGenus)->Arg(100)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_ProcessEncounters(benchmark::State& state) {
  gd::GeneratorConfig g;
  const auto data = gd::generateDataset(g);
  gd::EvmConfig evm;
  evm.openSpaceScale = gd::defaultOpenSpaceScale(g);
  const auto count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    gd::Hierarchy h(data.tree.node(data.tree.root()).label);
    gd::SupervisionMemory memory;
    gd::Recognizer rec(evm);
    gd::SimulatedOracle oracle(data.tree);
    for (std::size_t i = 0; i < count; ++i) {
      gd::processEncounter(h, std::make_shared<const gd::Encounter>(data.encounters[i]), oracle,
                           memory, rec);
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count));
}
BENCHMARK(BM_ProcessEncounters)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

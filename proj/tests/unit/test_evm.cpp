#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gd/errors.hpp"
#include "gd/evm.hpp"
#include "gd/random.hpp"
#include "gd/weibull.hpp"
#include "oracles.hpp"

namespace {

gd::VisualObject vo(gd::VisualObjectId id, std::vector<double> x) {
  return gd::VisualObject{id, gd::Embedding(std::move(x)), {0, 0}, "e"};
}

std::vector<double> randomSamples(gd::Rng& rng, std::size_t n) {
  // Weibull draws by inversion with a random shape and scale.
  const double k = 0.4 + 4 * rng.uniform();
  const double lam = 0.1 + 10 * rng.uniform();
  std::vector<double> xs;
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(lam * std::pow(-std::log(1 - rng.uniform()), 1 / k));
  }
  return xs;
}

}  // namespace

TEST_CASE("degenerate samples give the steep fallback") {
  const std::vector<double> same(7, 2.5);
  const auto w = gd::fitWeibull(same);
  CHECK(w.shape == gd::kDegenerateShape);
  CHECK(w.scale == 2.5);
  const auto one = gd::fitWeibull(std::vector<double>{0.3});
  CHECK(one.shape == gd::kDegenerateShape);
  CHECK(one.scale == 0.3);
}

TEST_CASE("fitWeibull rejects non-positive samples") {
  CHECK_THROWS_AS(gd::fitWeibull(std::vector<double>{}), gd::InvalidInput);
  CHECK_THROWS_AS(gd::fitWeibull(std::vector<double>{1.0, 0.0}), gd::InvalidInput);
  CHECK_THROWS_AS(gd::fitWeibull(std::vector<double>{1.0, -2.0}), gd::InvalidInput);
  CHECK_THROWS_AS(gd::fitWeibull(std::vector<double>{1.0, INFINITY}), gd::InvalidInput);
}

TEST_CASE("exponential samples recover shape one") {
  gd::Rng rng(1);
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back(-std::log(1 - rng.uniform()));
  const auto w = gd::fitWeibull(xs);
  CHECK(std::abs(w.shape - 1.0) < 0.1);
  const auto grid = oracle::weibullGrid(xs);
  CHECK(oracle::weibullLogLikelihood(xs, w.shape, w.scale) >= grid.logLikelihood - 1e-4);
}

TEST_CASE("fitted likelihood is at least the grid optimum") {
  gd::Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto xs = randomSamples(rng, 5 + rng.below(60));
    const auto w = gd::fitWeibull(xs);
    const auto grid = oracle::weibullGrid(xs, 0.2, 5.0, 0.01);
    CHECK(oracle::weibullLogLikelihood(xs, w.shape, w.scale) >= grid.logLikelihood - 1e-4);
    CHECK(w.logLikelihood(xs) ==
          doctest::Approx(oracle::weibullLogLikelihood(xs, w.shape, w.scale)).epsilon(1e-10));
  }
}

TEST_CASE("fitWeibull is scale equivariant") {
  gd::Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    auto xs = randomSamples(rng, 3 + rng.below(30));
    const double c = std::exp(6 * rng.uniform() - 3);
    const auto a = gd::fitWeibull(xs);
    for (double& x : xs) x *= c;
    const auto b = gd::fitWeibull(xs);
    CHECK(std::abs(a.shape - b.shape) <= 1e-6);
    CHECK(std::abs(b.scale / (a.scale * c) - 1) <= 1e-6);
  }
}

TEST_CASE("survival formula") {
  const gd::WeibullModel w{1.0, 2.0};
  CHECK(w.survival(2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(w.survival(0.0) == 1.0);
}

TEST_CASE("one-dimensional class with two negatives") {
  const std::vector<gd::VisualObject> pos{vo(0, {0.0})};
  const std::vector<gd::VisualObject> neg{vo(1, {2.0}), vo(2, {-4.0})};
  gd::EvmConfig cfg;
  cfg.tailSize = 2;
  const auto model = gd::fitClassModel(pos, neg, cfg);
  REQUIRE(model.extremeVectors().size() == 1);
  CHECK(gd::marginTail(pos[0], std::vector<const gd::VisualObject*>{&neg[0], &neg[1]}, 2) ==
        std::vector<double>{1.0, 2.0});
  CHECK(model.extremeVectors()[0].weibull == gd::fitWeibull(std::vector<double>{1.0, 2.0}));
}

TEST_CASE("no negatives gives the open-space model") {
  const std::vector<gd::VisualObject> pos{vo(0, {0.0, 1.0}), vo(1, {3.0, 1.0})};
  gd::EvmConfig cfg;
  cfg.openSpaceScale = 7.5;
  const auto model = gd::fitClassModel(pos, {}, cfg);
  for (const auto& ev : model.extremeVectors()) {
    CHECK(ev.weibull == gd::WeibullModel{1.0, 7.5});
  }
}

TEST_CASE("margin tails match all-pairs computation") {
  gd::Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 1 + rng.below(6);
    std::vector<gd::VisualObject> pos, neg;
    for (std::size_t i = 0; i < 1 + rng.below(8); ++i) {
      std::vector<double> x(d);
      for (double& c : x) c = rng.normal();
      pos.push_back(vo(i, x));
    }
    for (std::size_t i = 0; i < rng.below(25); ++i) {
      std::vector<double> x(d);
      for (double& c : x) c = rng.normal() + 1;
      neg.push_back(vo(100 + i, x));
    }
    gd::EvmConfig cfg;
    cfg.tailSize = 1 + rng.below(10);
    const auto model = gd::fitClassModel(pos, neg, cfg);
    for (const auto& ev : model.extremeVectors()) {
      const auto& p = *std::find_if(pos.begin(), pos.end(), [&](const gd::VisualObject& v) {
        return v.id == ev.sourceVisualObjectId;
      });
      const auto expected = oracle::bruteTail(p, neg, cfg.tailSize);
      std::vector<const gd::VisualObject*> ptrs;
      for (const auto& n : neg) ptrs.push_back(&n);
      const auto tail = gd::marginTail(p, ptrs, cfg.tailSize);
      REQUIRE(tail.size() == expected.size());
      for (std::size_t i = 0; i < tail.size(); ++i) {
        CHECK(tail[i] == doctest::Approx(expected[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("class model does not depend on input order") {
  gd::Rng rng(6);
  std::vector<gd::VisualObject> pos, neg;
  for (gd::VisualObjectId i = 0; i < 10; ++i) pos.push_back(vo(i, {rng.normal(), rng.normal()}));
  for (gd::VisualObjectId i = 0; i < 20; ++i) {
    neg.push_back(vo(50 + i, {rng.normal() + 2, rng.normal()}));
  }
  const auto a = gd::fitClassModel(pos, neg);
  std::reverse(pos.begin(), pos.end());
  std::reverse(neg.begin(), neg.end());
  const auto b = gd::fitClassModel(pos, neg);
  REQUIRE(a.extremeVectors().size() == b.extremeVectors().size());
  for (std::size_t i = 0; i < a.extremeVectors().size(); ++i) {
    CHECK(a.extremeVectors()[i].sourceVisualObjectId == b.extremeVectors()[i].sourceVisualObjectId);
    CHECK(a.extremeVectors()[i].weibull == b.extremeVectors()[i].weibull);
  }
}

TEST_CASE("inclusion probability examples") {
  const gd::EvmClassModel model({gd::ExtremeVector{gd::Embedding({0.0, 0.0}), {1.0, 2.0}, 3}},
                                16);
  CHECK(gd::inclusionProbability(model, gd::Embedding({0.0, 0.0})) == 1.0);
  CHECK(gd::inclusionProbability(model, gd::Embedding({0.0, 2.0})) ==
        doctest::Approx(0.367879).epsilon(1e-6));
  CHECK_THROWS_AS(gd::inclusionProbability(model, gd::Embedding({1.0})), gd::InvalidInput);
}

TEST_CASE("nearest extreme vector ties go to the lowest source id") {
  const gd::EvmClassModel model({gd::ExtremeVector{gd::Embedding({1.0}), {1.0, 1.0}, 9},
                                 gd::ExtremeVector{gd::Embedding({-1.0}), {1.0, 100.0}, 4}},
                                16);
  CHECK(model.extremeVectors()[model.nearest(std::vector<double>{0.0})].sourceVisualObjectId == 4);
  CHECK(gd::inclusionProbability(model, gd::Embedding({0.0})) == std::exp(-0.01));
}

TEST_CASE("bucketed nearest search agrees with a full scan") {
  gd::Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    std::vector<gd::ExtremeVector> evs;
    const std::size_t n = 40 + rng.below(400);
    for (std::size_t i = 0; i < n; ++i) {
      // Clustered points with some exact duplicates.
      const double cx = double(rng.below(5)) * 4;
      std::vector<double> x{cx + rng.normal(), rng.normal(), rng.normal()};
      if (i > 0 && rng.below(10) == 0) x = std::vector<double>(evs.back().embedding.values().begin(),
                                                               evs.back().embedding.values().end());
      evs.push_back({gd::Embedding(x), {1.0 + rng.uniform(), 1.0 + rng.uniform()},
                     static_cast<gd::VisualObjectId>(rng.below(100000))});
    }
    const gd::EvmClassModel model(evs, 16);
    for (int q = 0; q < 200; ++q) {
      std::vector<double> x{rng.normal() * 8 + 8, rng.normal() * 2, rng.normal() * 2};
      if (q % 10 == 0) {
        const auto v = model.extremeVectors()[rng.below(n)].embedding.values();
        x.assign(v.begin(), v.end());
      }
      double bestD = INFINITY;
      std::size_t best = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto e = model.extremeVectors()[i].embedding.values();
        const double d = oracle::naiveDistance(x, {e.begin(), e.end()});
        if (d < bestD) {
          bestD = d;
          best = i;
        }
      }
      double d = 0;
      const auto got = model.nearest(x, &d);
      CHECK(d == doctest::Approx(bestD).epsilon(1e-12));
      // Equal distances may pick another index only if it has the same
      // source id ordering position, i.e. never a higher id.
      CHECK(model.extremeVectors()[got].sourceVisualObjectId <=
            model.extremeVectors()[best].sourceVisualObjectId);
    }
  }
}

TEST_CASE("inclusion probability properties") {
  gd::Rng rng(10);
  for (int t = 0; t < 300; ++t) {
    std::vector<gd::ExtremeVector> evs;
    for (gd::VisualObjectId i = 0; i < 1 + rng.below(6); ++i) {
      evs.push_back({gd::Embedding({rng.normal() * 5, rng.normal() * 5}),
                     {0.2 + 5 * rng.uniform(), 0.1 + 5 * rng.uniform()}, i});
    }
    const gd::EvmClassModel model(evs, 16);
    const gd::Embedding x({rng.normal() * 8, rng.normal() * 8});
    const double p = gd::inclusionProbability(model, x);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(gd::inclusionProbability(model, evs[0].embedding) == 1.0);
  }
}

#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "gd/errors.hpp"
#include "gd/hierarchy.hpp"
#include "gd/random.hpp"
#include "oracles.hpp"

using gd::Hierarchy;
using gd::NodeId;

namespace {

gd::EncounterPtr enc(int i, std::size_t views = 1) {
  std::vector<std::vector<double>> xs(views, {double(i), 0.0});
  return fixture::shared("e" + std::to_string(i), xs, std::nullopt,
                         static_cast<gd::VisualObjectId>(i * 10));
}

// Random hierarchy grown with the three mutations.
Hierarchy randomHierarchy(gd::Rng& rng, int steps) {
  Hierarchy h;
  for (int i = 0; i < steps; ++i) {
    const NodeId p{rng.below(h.size())};
    const auto& kids = h.childrenOf(p);
    const auto choice = rng.below(3);
    if (choice == 0 && !kids.empty()) {
      h.insertIntermediate(p, kids[rng.below(kids.size())], enc(i, 1 + rng.below(3)));
    } else if (choice == 1 && p != h.root()) {
      h.addEncounterToNode(p, enc(i, 1 + rng.below(3)));
    } else {
      h.addObjectNode(p, enc(i, 1 + rng.below(3)));
    }
  }
  return h;
}

}  // namespace

TEST_CASE("root basics") {
  Hierarchy h;
  CHECK(h.size() == 1);
  CHECK(h.root() == NodeId{0});
  CHECK_FALSE(h.node(h.root()).parent);
  CHECK_THROWS_AS(h.parentOf(h.root()), gd::PreconditionError);
  h.addObjectNode(h.root(), enc(1));
  CHECK(h.root() == NodeId{0});
}

TEST_CASE("addObjectNode") {
  Hierarchy h;
  const auto a = h.addObjectNode(h.root(), enc(1));
  CHECK(h.size() == 2);
  CHECK(h.node(a).encounters == std::vector<gd::EncounterId>{"e1"});
  CHECK(h.parentOf(a) == h.root());
  const auto b = h.addObjectNode(a, enc(2));
  CHECK(h.geodesicDistance(h.root(), b) == h.depth(a) + 1);
  const auto c = h.addObjectNode(h.root(), enc(3));
  CHECK(h.childrenOf(h.root()) == std::vector<NodeId>{a, c});
  CHECK(h.childrenOf(b).empty());
  CHECK_THROWS(h.addObjectNode(NodeId{99}, enc(4)));
  CHECK_THROWS_AS(h.addObjectNode(h.root(), enc(1)), gd::InvalidInput);
  CHECK(h.size() == 4);
}

TEST_CASE("addEncounterToNode") {
  Hierarchy h;
  const auto a = h.addObjectNode(h.root(), enc(1, 4));
  const auto before = h.subtreeVisualObjects(a).size();
  h.addEncounterToNode(a, enc(2, 3));
  CHECK(h.encounterCount() == 2);
  CHECK(h.childrenOf(a).empty());
  CHECK(h.subtreeVisualObjects(a).size() == before + 3);
  CHECK(h.nodeOfEncounter("e2") == a);
  CHECK_THROWS(h.addEncounterToNode(NodeId{7}, enc(3)));
  CHECK_THROWS(h.addEncounterToNode(h.root(), enc(3)));
}

TEST_CASE("insertIntermediate") {
  Hierarchy h;
  const auto a = h.addObjectNode(h.root(), enc(1));
  const auto b = h.addObjectNode(h.root(), enc(2));
  const int depthA = h.depth(a);
  const auto [m, leaf] = h.insertIntermediate(h.root(), a, enc(3));
  CHECK(h.size() == 5);
  CHECK(h.parentOf(a) == m);
  CHECK(h.parentOf(leaf) == m);
  CHECK(h.childrenOf(h.root()) == std::vector<NodeId>{m, b});
  CHECK(h.childrenOf(m) == std::vector<NodeId>{a, leaf});
  CHECK(h.geodesicDistance(a, leaf) == 2);
  CHECK(h.depth(a) == depthA + 1);
  CHECK(h.node(m).encounters.empty());
  CHECK_THROWS_AS(h.insertIntermediate(h.root(), a, enc(4)), gd::PreconditionError);
}

TEST_CASE("leaf set grows by the new leaf") {
  Hierarchy h;
  const auto a = h.addObjectNode(h.root(), enc(1));
  const auto b = h.addObjectNode(a, enc(2));
  const auto c = h.addObjectNode(a, enc(3));
  auto leaves = [&](NodeId n) {
    std::set<std::uint64_t> out;
    std::vector<NodeId> stack{n};
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      if (h.childrenOf(cur).empty()) out.insert(cur.value);
      for (auto k : h.childrenOf(cur)) stack.push_back(k);
    }
    return out;
  };
  auto before = leaves(a);
  const auto [m, leaf] = h.insertIntermediate(a, c, enc(4));
  before.insert(leaf.value);
  CHECK(leaves(a) == before);
  CHECK(h.isAncestorOrSelf(a, m));
  CHECK(h.lowestCommonAncestor(b, leaf) == a);
}

TEST_CASE("node counts follow the mutations") {
  gd::Rng rng(1);
  Hierarchy h;
  std::size_t expected = 1;
  for (int i = 0; i < 200; ++i) {
    const NodeId p{rng.below(h.size())};
    const auto& kids = h.childrenOf(p);
    if (!kids.empty() && rng.below(2) == 0) {
      h.insertIntermediate(p, kids.front(), enc(i));
      expected += 2;
    } else {
      h.addObjectNode(p, enc(i));
      expected += 1;
    }
    REQUIRE(h.size() == expected);
  }
}

TEST_CASE("subtree visual objects match a recursive traversal") {
  gd::Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    const auto h = randomHierarchy(rng, 40);
    std::size_t total = 0;
    for (std::uint64_t i = 0; i < h.size(); ++i) {
      for (const auto& id : h.node(NodeId{i}).encounters) {
        total += h.encounter(id).visualObjects.size();
      }
    }
    CHECK(h.subtreeVisualObjects(h.root()).size() == total);
    for (std::uint64_t i = 0; i < h.size(); ++i) {
      std::vector<gd::VisualObjectId> got;
      for (const auto* v : h.subtreeVisualObjects(NodeId{i})) got.push_back(v->id);
      CHECK(got == oracle::dfsVisualObjectIds(h, NodeId{i}));
      std::size_t viaEncounters = 0;
      for (const auto& e : h.subtreeEncounters(NodeId{i})) viaEncounters += e->visualObjects.size();
      CHECK(viaEncounters == got.size());
    }
  }
}

TEST_CASE("geodesic distance matches BFS and the depth formula") {
  gd::Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const auto h = randomHierarchy(rng, 30);
    for (std::uint64_t a = 0; a < h.size(); ++a) {
      const auto bfs = oracle::bfsDistances(h, NodeId{a});
      for (std::uint64_t b = 0; b < h.size(); ++b) {
        const int d = h.geodesicDistance(NodeId{a}, NodeId{b});
        CHECK(d == bfs[b]);
        CHECK(d == h.depth(NodeId{a}) + h.depth(NodeId{b}) -
                       2 * h.depth(h.lowestCommonAncestor(NodeId{a}, NodeId{b})));
      }
    }
  }
}

TEST_CASE("stamps change on the mutated path only") {
  Hierarchy h;
  const auto a = h.addObjectNode(h.root(), enc(1));
  const auto b = h.addObjectNode(h.root(), enc(2));
  const auto sa = h.stamp(a), sb = h.stamp(b), sr = h.stamp(h.root());
  h.addEncounterToNode(a, enc(3));
  CHECK(h.stamp(a) != sa);
  CHECK(h.stamp(h.root()) != sr);
  CHECK(h.stamp(b) == sb);
}

TEST_CASE("snapshot round trip") {
  gd::Rng rng(4);
  auto h = randomHierarchy(rng, 25);
  std::map<std::string, gd::EncounterPtr> pool;
  for (std::uint64_t i = 0; i < h.size(); ++i) {
    for (const auto& id : h.node(NodeId{i}).encounters) {
      pool[id] = std::make_shared<const gd::Encounter>(h.encounter(id));
    }
  }
  const auto lookup = [&](const gd::EncounterId& id) -> gd::EncounterPtr {
    const auto it = pool.find(id);
    return it == pool.end() ? nullptr : it->second;
  };
  const auto snap = h.toJson();
  CHECK(snap["root"] == 0);
  CHECK(snap["nodes"].size() == h.size());
  const auto back = Hierarchy::fromJson(snap, lookup);
  CHECK(back.toJson() == snap);

  auto broken = snap;
  broken["nodes"][1]["parent"] = 1;
  CHECK_THROWS_AS(Hierarchy::fromJson(broken, lookup), gd::InvalidInput);
  broken = snap;
  broken["nodes"][0]["encounters"].push_back("nope");
  CHECK_THROWS_AS(Hierarchy::fromJson(broken, lookup), gd::InvalidInput);
  CHECK_THROWS_AS(Hierarchy::fromJson(nlohmann::json::object(), lookup), gd::InvalidInput);
}

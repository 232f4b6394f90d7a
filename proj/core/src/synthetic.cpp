#include "gd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "gd/errors.hpp"

namespace gd {

namespace {

std::vector<std::string_view> splitPath(std::string_view label) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t slash = label.find('/', start);
    if (slash == std::string_view::npos) {
      parts.push_back(label.substr(start));
      break;
    }
    parts.push_back(label.substr(start, slash - start));
    start = slash + 1;
  }
  return parts;
}

}  // namespace

std::string commonLabelPrefix(std::string_view a, std::string_view b) {
  const auto pa = splitPath(a);
  const auto pb = splitPath(b);
  std::string out;
  for (std::size_t i = 0; i < std::min(pa.size(), pb.size()); ++i) {
    if (pa[i] != pb[i]) break;
    if (i > 0) out += '/';
    out += pa[i];
  }
  return out;
}

bool labelIsAncestorOrSelf(std::string_view ancestor, std::string_view label) {
  if (ancestor.size() > label.size()) return false;
  if (label.substr(0, ancestor.size()) != ancestor) return false;
  return ancestor.size() == label.size() || label[ancestor.size()] == '/';
}

std::vector<double> GeneratorConfig::resolvedScales() const {
  if (!levelOffsetScales.empty()) return levelOffsetScales;
  std::vector<double> scales;
  double s = 8.0;
  for (int i = 0; i < depth; ++i, s /= 2.0) scales.push_back(s);
  return scales;
}

void GeneratorConfig::validate() const {
  if (depth < 1) throw InvalidInput("depth must be positive");
  if (branching < 1) throw InvalidInput("branching must be positive");
  if (encountersPerLeaf < 1) {
    throw InvalidInput("encountersPerLeaf must be positive");
  }
  if (dimension < 2) throw InvalidInput("dimension must be at least 2");
  if (!(viewNoiseSigma > 0.0) || !std::isfinite(viewNoiseSigma)) {
    throw InvalidInput("viewNoiseSigma must be positive");
  }
  const auto scales = resolvedScales();
  if (scales.size() != static_cast<std::size_t>(depth)) {
    throw InvalidInput("levelOffsetScales must have one entry per level");
  }
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0) || !std::isfinite(scales[i])) {
      throw InvalidInput("levelOffsetScales entries must be positive");
    }
    if (i > 0 && !(scales[i] < scales[i - 1])) {
      throw InvalidInput("levelOffsetScales must be strictly decreasing");
    }
  }
}

GtIndex GroundTruthTree::addNode(std::optional<GtIndex> parent,
                                 Embedding prototype) {
  GroundTruthNode node;
  node.prototype = std::move(prototype);
  node.parent = parent;
  if (parent) {
    auto& p = nodes_.at(*parent);
    node.label = p.label + "/" + std::to_string(p.children.size());
    node.depth = p.depth + 1;
  } else {
    if (!nodes_.empty()) throw PreconditionError("tree already has a root");
    node.label = "root";
  }
  const GtIndex index = nodes_.size();
  if (parent) nodes_[*parent].children.push_back(index);
  byLabel_.emplace(node.label, index);
  nodes_.push_back(std::move(node));
  return index;
}

GroundTruthTree GroundTruthTree::fromLeafLabels(
    const std::vector<std::string>& labels) {
  if (labels.empty()) throw InvalidInput("no ground-truth labels");
  // Sorted distinct prefixes give parents before children.
  std::set<std::string> prefixes;
  std::string rootName;
  for (const auto& label : labels) {
    const auto parts = splitPath(label);
    for (const auto& part : parts) {
      if (part.empty()) {
        throw InvalidInput("empty component in label '" + label + "'");
      }
    }
    if (rootName.empty()) rootName = std::string(parts.front());
    if (parts.front() != rootName) {
      throw InvalidInput("labels do not share a root component: '" + label +
                         "'");
    }
    std::string prefix;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i > 0) prefix += '/';
      prefix += parts[i];
      prefixes.insert(prefix);
    }
  }
  std::vector<std::string> ordered(prefixes.begin(), prefixes.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const std::string& a, const std::string& b) {
                     return std::count(a.begin(), a.end(), '/') <
                            std::count(b.begin(), b.end(), '/');
                   });

  GroundTruthTree tree;
  for (const auto& label : ordered) {
    GroundTruthNode node;
    node.label = label;
    const auto slash = label.rfind('/');
    if (slash != std::string::npos) {
      const GtIndex parent = tree.byLabel_.at(label.substr(0, slash));
      node.parent = parent;
      node.depth = tree.nodes_[parent].depth + 1;
      tree.nodes_[parent].children.push_back(tree.nodes_.size());
    }
    tree.byLabel_.emplace(label, tree.nodes_.size());
    tree.nodes_.push_back(std::move(node));
  }
  return tree;
}

std::optional<GtIndex> GroundTruthTree::find(std::string_view label) const {
  const auto it = byLabel_.find(std::string(label));
  if (it == byLabel_.end()) return std::nullopt;
  return it->second;
}

GtIndex GroundTruthTree::at(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw ConsistencyError("no ground-truth node labelled '" +
                         std::string(label) + "'");
}

std::vector<GtIndex> GroundTruthTree::leaves() const {
  std::vector<GtIndex> out;
  for (GtIndex i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].children.empty()) out.push_back(i);
  }
  return out;
}

bool GroundTruthTree::isAncestorOrSelf(GtIndex ancestor, GtIndex node) const {
  std::optional<GtIndex> cur = node;
  while (cur) {
    if (*cur == ancestor) return true;
    cur = nodes_.at(*cur).parent;
  }
  return false;
}

GtIndex GroundTruthTree::lowestCommonAncestor(GtIndex a, GtIndex b) const {
  while (nodes_.at(a).depth > nodes_.at(b).depth) a = *nodes_[a].parent;
  while (nodes_.at(b).depth > nodes_.at(a).depth) b = *nodes_[b].parent;
  while (a != b) {
    a = *nodes_[a].parent;
    b = *nodes_[b].parent;
  }
  return a;
}

GroundTruthTree generateTree(const GeneratorConfig& config) {
  config.validate();
  const auto scales = config.resolvedScales();
  const auto dim = static_cast<std::size_t>(config.dimension);
  Rng rng = Rng::stream(config.seed, 0);

  GroundTruthTree tree;
  std::vector<GtIndex> frontier{tree.addNode(std::nullopt, Embedding::zeros(dim))};
  for (int level = 0; level < config.depth; ++level) {
    std::vector<GtIndex> next;
    for (GtIndex parent : frontier) {
      for (int c = 0; c < config.branching; ++c) {
        const auto base = tree.node(parent).prototype.values();
        std::vector<double> proto(base.begin(), base.end());
        for (double& x : proto) x += scales[level] * rng.normal();
        next.push_back(tree.addNode(parent, Embedding(std::move(proto))));
      }
    }
    frontier = std::move(next);
  }
  return tree;
}

Encounter generateEncounter(const GroundTruthTree& tree,
                            const GeneratorConfig& config, GtIndex leaf,
                            Rng& rng, EncounterId id, VisualObjectId firstId) {
  if (leaf >= tree.size() || !tree.node(leaf).children.empty()) {
    throw InvalidInput("generateEncounter needs a leaf of the tree");
  }
  std::vector<GtIndex> path;
  for (GtIndex n = leaf; tree.node(n).parent; n = *tree.node(n).parent) {
    path.push_back(n);
  }
  std::reverse(path.begin(), path.end());
  rng.shuffle(path);

  Encounter encounter;
  encounter.id = std::move(id);
  encounter.groundTruthLeaf = tree.node(leaf).label;
  std::size_t frame = 0;
  for (GtIndex n : path) {
    const auto proto = tree.node(n).prototype.values();
    std::vector<double> view(proto.begin(), proto.end());
    for (double& x : view) x += config.viewNoiseSigma * rng.normal();
    encounter.visualObjects.push_back(VisualObject{
        firstId++, Embedding(std::move(view)), {frame, frame}, encounter.id});
    ++frame;
  }
  return encounter;
}

Dataset generateDataset(const GeneratorConfig& config) {
  Dataset data{generateTree(config), {}};
  const auto leaves = data.tree.leaves();
  VisualObjectId nextVo = 0;
  std::uint64_t key = 1;
  for (GtIndex leaf : leaves) {
    for (int k = 0; k < config.encountersPerLeaf; ++k, ++key) {
      Rng rng = Rng::stream(config.seed, key);
      auto e = generateEncounter(data.tree, config, leaf, rng,
                                 data.tree.node(leaf).label + "#" +
                                     std::to_string(k),
                                 nextVo);
      nextVo += e.visualObjects.size();
      data.encounters.push_back(std::move(e));
    }
  }
  return data;
}

Dataset datasetFromEncounters(std::vector<Encounter> encounters) {
  std::vector<std::string> labels;
  for (const auto& e : encounters) {
    if (!e.groundTruthLeaf) {
      throw InvalidInput("encounter '" + e.id + "' has no ground_truth label");
    }
    labels.push_back(*e.groundTruthLeaf);
  }
  Dataset data{GroundTruthTree::fromLeafLabels(labels), std::move(encounters)};
  for (const auto& e : data.encounters) {
    if (!data.tree.node(data.tree.at(*e.groundTruthLeaf)).children.empty()) {
      throw InvalidInput("ground_truth '" + *e.groundTruthLeaf +
                         "' is an inner node of another label's path");
    }
  }
  return data;
}

}  // namespace gd

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gd/hierarchy.hpp"
#include "gd/model.hpp"

namespace fixture {

// Encounter with one visual object per vector; frame spans are one frame
// each and ids continue from `firstId`.
inline gd::Encounter encounter(const std::string& id,
                               const std::vector<std::vector<double>>& views,
                               std::optional<std::string> leaf = std::nullopt,
                               gd::VisualObjectId firstId = 0) {
  gd::Encounter e;
  e.id = id;
  e.groundTruthLeaf = std::move(leaf);
  for (std::size_t i = 0; i < views.size(); ++i) {
    e.visualObjects.push_back(gd::VisualObject{firstId + i, gd::Embedding(views[i]),
                                               gd::FrameSpan{i, i}, id});
  }
  return e;
}

inline gd::EncounterPtr shared(const std::string& id,
                               const std::vector<std::vector<double>>& views,
                               std::optional<std::string> leaf = std::nullopt,
                               gd::VisualObjectId firstId = 0) {
  return std::make_shared<const gd::Encounter>(encounter(id, views, std::move(leaf), firstId));
}

}  // namespace fixture

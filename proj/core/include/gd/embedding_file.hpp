#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "gd/model.hpp"

namespace gd {

// Line-delimited JSON, one encounter per line:
//   {"encounter_id": "e1", "ground_truth": "root/1/0",
//    "frames": [[...], ...], "segment_threshold": 0.5}
// or
//   {"encounter_id": "e1", "visual_objects": [[...], ...]}
// All vectors in one file share a dimension. Visual object ids are assigned
// consecutively in file order starting at 0. Blank lines are skipped.

std::vector<Encounter> parseEmbeddingLines(std::istream& in);
std::vector<Encounter> loadEmbeddingFile(const std::filesystem::path& path);

/// Writes the visual_objects form. Reloading gives structurally identical
/// encounters when their ids were assigned the same way.
void writeEmbeddingLines(std::ostream& out, const std::vector<Encounter>& encounters);
void writeEmbeddingFile(const std::filesystem::path& path,
                        const std::vector<Encounter>& encounters);

}  // namespace gd

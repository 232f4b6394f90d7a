#include "gd/embedding_file.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "gd/errors.hpp"

namespace gd {

namespace {

using nlohmann::json;

std::vector<Embedding> readVectors(const json& arr, std::size_t line,
                                   const char* field) {
  if (!arr.is_array() || arr.empty()) {
    throw ParseError(line, std::string("'") + field +
                               "' must be a non-empty array of vectors");
  }
  std::vector<Embedding> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_array() || v.empty()) {
      throw ParseError(line, std::string("'") + field +
                                 "' entries must be non-empty arrays");
    }
    std::vector<double> values;
    values.reserve(v.size());
    for (const auto& x : v) {
      if (!x.is_number()) {
        throw ParseError(line, std::string("'") + field +
                                   "' contains a non-numeric value");
      }
      values.push_back(x.get<double>());
    }
    try {
      out.emplace_back(std::move(values));
    } catch (const InvalidInput& e) {
      throw ParseError(line, e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<Encounter> parseEmbeddingLines(std::istream& in) {
  std::vector<Encounter> encounters;
  std::string text;
  std::size_t lineNo = 0;
  std::size_t dim = 0;
  VisualObjectId nextId = 0;

  while (std::getline(in, text)) {
    ++lineNo;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(lineNo, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(lineNo, "record is not an object");
    if (!record.contains("encounter_id") || !record["encounter_id"].is_string()) {
      throw ParseError(lineNo, "missing string field 'encounter_id'");
    }
    const std::string id = record["encounter_id"].get<std::string>();

    Encounter e;
    if (record.contains("visual_objects")) {
      const auto vectors = readVectors(record["visual_objects"], lineNo,
                                       "visual_objects");
      e.id = id;
      std::size_t frame = 0;
      for (const auto& v : vectors) {
        e.visualObjects.push_back(VisualObject{nextId++, v, {frame, frame}, id});
        ++frame;
      }
    } else if (record.contains("frames")) {
      const auto frames = readVectors(record["frames"], lineNo, "frames");
      if (!record.contains("segment_threshold") ||
          !record["segment_threshold"].is_number()) {
        throw ParseError(lineNo, "'frames' requires numeric 'segment_threshold'");
      }
      for (const auto& f : frames) {
        if (f.dimension() != frames.front().dimension()) {
          throw ParseError(lineNo, "dimension inconsistency within record");
        }
      }
      try {
        e = segmentEncounter(frames, record["segment_threshold"].get<double>(),
                             id, nextId);
      } catch (const InvalidInput& err) {
        throw ParseError(lineNo, err.what());
      }
      nextId += e.visualObjects.size();
    } else {
      throw ParseError(lineNo, "record needs 'frames' or 'visual_objects'");
    }

    if (record.contains("ground_truth") && !record["ground_truth"].is_null()) {
      if (!record["ground_truth"].is_string()) {
        throw ParseError(lineNo, "'ground_truth' must be a string");
      }
      e.groundTruthLeaf = record["ground_truth"].get<std::string>();
    }

    for (const auto& vo : e.visualObjects) {
      if (dim == 0) dim = vo.embedding.dimension();
      if (vo.embedding.dimension() != dim) {
        throw ParseError(lineNo, "dimension inconsistency: expected " +
                                     std::to_string(dim) + ", got " +
                                     std::to_string(vo.embedding.dimension()));
      }
    }
    encounters.push_back(std::move(e));
  }
  return encounters;
}

std::vector<Encounter> loadEmbeddingFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open embedding file " + path.string());
  return parseEmbeddingLines(in);
}

void writeEmbeddingLines(std::ostream& out,
                         const std::vector<Encounter>& encounters) {
  for (const auto& e : encounters) {
    json record;
    record["encounter_id"] = e.id;
    if (e.groundTruthLeaf) record["ground_truth"] = *e.groundTruthLeaf;
    json vectors = json::array();
    for (const auto& vo : e.visualObjects) {
      vectors.push_back(std::vector<double>(vo.embedding.values().begin(),
                                            vo.embedding.values().end()));
    }
    record["visual_objects"] = std::move(vectors);
    out << record.dump() << '\n';
  }
}

void writeEmbeddingFile(const std::filesystem::path& path,
                        const std::vector<Encounter>& encounters) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write embedding file " + path.string());
  writeEmbeddingLines(out, encounters);
  if (!out) throw InvalidInput("write failed for " + path.string());
}

}  // namespace gd

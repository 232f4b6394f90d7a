#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gd/experiment.hpp"
#include "gd/hierarchy.hpp"
#include "gd/interaction.hpp"
#include "gd/recognition.hpp"
#include "gd/synthetic.hpp"
#include "gd/transcript.hpp"

namespace httplib {
class Server;
}

namespace gd::service {

/// Error carrying the HTTP status it maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Body of POST /sessions. Either
///   {"synthetic": {"depth", "branching", "encounters_per_leaf",
///                  "dimension", "level_offset_scales", "view_noise_sigma",
///                  "seed"}, ...}
/// or
///   {"embeddings": "<line-delimited JSON text>", ...}
/// plus optional "ordering_seed", "tail_size", "open_space_scale".
struct SessionSpec {
  std::optional<GeneratorConfig> synthetic;
  std::optional<std::string> embeddings;
  std::uint64_t orderingSeed = 0;
  std::size_t tailSize = 16;
  std::optional<double> openSpaceScale;

  /// Throws ServiceError(400) on anything invalid.
  static SessionSpec fromJson(const nlohmann::json& body);
};

struct MetricRow {
  std::size_t iteration = 0;
  int predictGenus = 0;
  int naive = 0;
};

/// A human-in-the-loop session: the encounter queue is presented in the
/// order a simulated run with the same ordering seed (run index 0) would
/// use, and each placement goes through the same dialog state machine.
/// All calls are serialized on the session's mutex.
class Session {
 public:
  Session(std::string id, const SessionSpec& spec);

  const std::string& id() const noexcept { return id_; }

  /// The pending query, else starts the next encounter and returns either
  /// its first query or, when no question is needed, the placement.
  /// {"type": "query" | "placement" | "done", ...}
  nlohmann::json nextQuery();

  /// Consumes the pending query. ServiceError(409) for a stale or unknown
  /// id. The response carries the placement when the answer completed one.
  nlohmann::json postAnswer(const std::string& queryId, bool answer);

  nlohmann::json hierarchy() const;
  nlohmann::json metrics() const;
  nlohmann::json transcript() const;

  std::size_t queued() const;
  std::size_t placements() const;

 private:
  nlohmann::json commitPlacement();
  nlohmann::json issuePending();

  std::string id_;
  mutable std::mutex mutex_;
  Dataset data_;
  std::vector<EncounterPtr> queue_;
  std::size_t nextEncounter_ = 0;
  Hierarchy hierarchy_;
  SupervisionMemory memory_;
  std::unique_ptr<Recognizer> recognizer_;
  GroundTruthAnnotator annotator_;
  std::optional<EncounterDialog> dialog_;
  std::optional<std::string> pendingId_;
  Transcript transcript_;
  std::vector<MetricRow> metrics_;
};

class SessionRegistry {
 public:
  /// Returns the new session id ("s1", "s2", ...).
  std::string create(const nlohmann::json& body);
  /// ServiceError(404) for unknown ids.
  std::shared_ptr<Session> find(const std::string& id) const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_ = 1;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// Transport-independent routing of the session API:
///   POST /sessions, GET /sessions/{id}/query, POST /sessions/{id}/answer,
///   GET /sessions/{id}/hierarchy, GET /sessions/{id}/metrics,
///   GET /sessions/{id}/transcript.
/// Errors come back as {"error": message}.
Response dispatch(SessionRegistry& registry, std::string_view method,
                  std::string_view path, std::string_view body);

/// Registers the API on `server`; serves `staticDir` at "/" when non-empty.
void mountRoutes(httplib::Server& server, SessionRegistry& registry,
                 const std::string& staticDir = {});

}  // namespace gd::service

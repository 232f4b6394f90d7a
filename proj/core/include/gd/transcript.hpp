#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gd/oracle.hpp"

namespace gd {

struct PlacementOutcome;

/// Audit log of one session: queries, answers and placements as JSON
/// events with a sequence number and a millisecond timestamp.
class Transcript {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit Transcript(Clock clock = systemClockMillis);

  /// Logs a query and returns its id ("q1", "q2", ...).
  std::string recordQuery(const Query& query);
  void recordAnswer(const std::string& queryId, bool answer);
  void recordPlacement(const EncounterId& encounter,
                       const PlacementOutcome& outcome);

  const std::vector<nlohmann::json>& events() const noexcept { return events_; }
  void writeJsonLines(std::ostream& out) const;

  static std::int64_t systemClockMillis();

 private:
  void push(nlohmann::json event);

  Clock clock_;
  std::vector<nlohmann::json> events_;
  std::uint64_t nextQuery_ = 1;
};

}  // namespace gd

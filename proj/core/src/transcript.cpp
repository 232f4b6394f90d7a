#include "gd/transcript.hpp"

#include <chrono>
#include <ostream>

#include "gd/interaction.hpp"

namespace gd {

Transcript::Transcript(Clock clock) : clock_(std::move(clock)) {}

std::int64_t Transcript::systemClockMillis() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch())
      .count();
}

void Transcript::push(nlohmann::json event) {
  event["seq"] = events_.size();
  event["timestamp"] = clock_ ? clock_() : 0;
  events_.push_back(std::move(event));
}

std::string Transcript::recordQuery(const Query& query) {
  std::string id = "q" + std::to_string(nextQuery_++);
  auto event = toJson(query);
  event["type"] = "query";
  event["query_id"] = id;
  push(std::move(event));
  return id;
}

void Transcript::recordAnswer(const std::string& queryId, bool answer) {
  push({{"type", "answer"}, {"query_id", queryId}, {"answer", answer}});
}

void Transcript::recordPlacement(const EncounterId& encounter,
                                 const PlacementOutcome& outcome) {
  auto event = toJson(outcome);
  event["type"] = "placement";
  event["encounter_id"] = encounter;
  push(std::move(event));
}

void Transcript::writeJsonLines(std::ostream& out) const {
  for (const auto& e : events_) out << e.dump() << '\n';
}

}  // namespace gd

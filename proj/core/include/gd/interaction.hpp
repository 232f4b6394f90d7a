#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gd/hierarchy.hpp"
#include "gd/oracle.hpp"
#include "gd/recognition.hpp"

namespace gd {

class Transcript;

enum class PlacementAction { Descend, Merge, NewChild, InsertIntermediate };

std::string_view to_string(PlacementAction action);

struct PlacementOutcome {
  PlacementAction action = PlacementAction::NewChild;
  NodeId placedNode;
  std::size_t queriesAsked = 0;
  /// The machine's suggested starting node and its probability.
  Prediction predicted;
  double threshold = kDefaultRejectionThreshold;
  /// First node on the way up that the user accepted as a genus.
  NodeId genus;
  std::optional<NodeId> intermediate;
  std::size_t ascendQueries = 0;
  std::size_t childrenInspected = 0;
};

nlohmann::json toJson(const PlacementOutcome& outcome);

/// One encounter's conversation with the user, as a resumable state
/// machine: prediction, then ascent to a confirmed genus, then refinement
/// down the hierarchy. pendingQuery() is the question awaiting an answer;
/// answer() consumes it and runs until the next question or a decision.
///
/// The hierarchy is only read until commit(), which applies the decided
/// Merge, NewChild or InsertIntermediate. Abandoning a dialog leaves the
/// hierarchy untouched.
class EncounterDialog {
 public:
  /// Full protocol: predictGenus at `threshold`, ascend, refine.
  EncounterDialog(const Hierarchy& h, EncounterPtr e, const Recognizer& recognizer,
                  double threshold);

  /// Ascent from `start` followed by refinement (no prediction).
  static EncounterDialog ascendFrom(const Hierarchy& h, EncounterPtr e,
                                    const Recognizer& recognizer, NodeId start);
  /// Refinement only, from a genus the user already confirmed.
  static EncounterDialog refineFrom(const Hierarchy& h, EncounterPtr e,
                                    const Recognizer& recognizer, NodeId genus);

  const std::optional<Query>& pendingQuery() const noexcept { return pending_; }
  void answer(bool yes);
  bool decided() const noexcept { return phase_ == Phase::Decided; }

  const Encounter& encounter() const noexcept { return *encounter_; }
  const EncounterPtr& encounterPtr() const noexcept { return encounter_; }
  const Prediction& prediction() const noexcept { return prediction_; }
  /// Set once the ascent is over.
  std::optional<NodeId> genus() const noexcept { return genus_; }
  /// Descent trace of each visual object from the prediction step.
  const std::vector<std::vector<TraceStep>>& traces() const noexcept {
    return traces_;
  }
  std::size_t queriesAsked() const noexcept { return queries_; }

  /// Applies the decision. Throws PreconditionError if undecided, already
  /// committed, or if `h` is not the unmodified hierarchy the dialog read.
  PlacementOutcome commit(Hierarchy& h, const Annotator& annotator);

 private:
  enum class Phase { Ascend, Refine, Decided, Committed };
  // AskSameGenus: the confirmed genus itself holds encounters, so it may
  // be the encounter's own object.
  enum class Step { AskSameGenus, AskGenus, AskSame, AskShares };

  EncounterDialog(const Hierarchy& h, EncounterPtr e, const Recognizer& recognizer);

  void enterRefine(NodeId genus);
  void descendInto(NodeId child);
  void decide(PlacementAction action, NodeId target);
  void advance();

  const Hierarchy* hierarchy_;
  std::uint64_t rootStamp_;
  EncounterPtr encounter_;
  const Recognizer* recognizer_;

  Phase phase_ = Phase::Ascend;
  Prediction prediction_;
  double threshold_ = kDefaultRejectionThreshold;
  std::vector<std::vector<TraceStep>> traces_;
  std::optional<Query> pending_;
  std::size_t queries_ = 0;
  std::size_t ascendQueries_ = 0;
  std::size_t childrenInspected_ = 0;

  NodeId ascendAt_;
  std::optional<NodeId> genus_;

  NodeId current_;  // current genus during refinement
  std::vector<NodeId> order_;
  std::size_t index_ = 0;
  Step step_ = Step::AskGenus;

  PlacementAction action_ = PlacementAction::NewChild;
  NodeId target_;
};

/// Children of `genus` sorted by decreasing best probability over the
/// encounter's visual objects; equal scores by lowest node id.
std::vector<NodeId> rankChildren(const Hierarchy& h, NodeId genus,
                                 const Encounter& e, const Recognizer& recognizer);

/// First node on the start-to-root path the oracle accepts as a genus.
/// The root is accepted without asking.
NodeId ascendToValidGenus(const Hierarchy& h, const Encounter& e, NodeId start,
                          Oracle& oracle, std::size_t* queries = nullptr);

PlacementOutcome refineGenus(Hierarchy& h, NodeId genus, EncounterPtr e,
                             Oracle& oracle, const Recognizer& recognizer);

/// One iteration of the main loop: choose the threshold from the
/// supervision memory, predict, ascend, refine, commit, and log one
/// supervision record per visual object. If the oracle throws, neither
/// the hierarchy nor the memory change.
PlacementOutcome processEncounter(Hierarchy& h, EncounterPtr e, Oracle& oracle,
                                  SupervisionMemory& memory,
                                  const Recognizer& recognizer,
                                  Transcript* transcript = nullptr);

/// Appends the records of a committed dialog.
void recordSupervision(SupervisionMemory& memory, const EncounterDialog& dialog,
                       const PlacementOutcome& outcome);

}  // namespace gd

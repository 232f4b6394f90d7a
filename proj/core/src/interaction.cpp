#include "gd/interaction.hpp"

#include <algorithm>

#include "gd/errors.hpp"
#include "gd/transcript.hpp"

namespace gd {

std::string_view to_string(PlacementAction action) {
  switch (action) {
    case PlacementAction::Descend:
      return "descend";
    case PlacementAction::Merge:
      return "merge";
    case PlacementAction::NewChild:
      return "new_child";
    case PlacementAction::InsertIntermediate:
      return "insert_intermediate";
  }
  return "unknown";
}

nlohmann::json toJson(const PlacementOutcome& o) {
  using nlohmann::json;
  return json{
      {"action", to_string(o.action)},
      {"placed_node", o.placedNode.value},
      {"queries_asked", o.queriesAsked},
      {"predicted_node", o.predicted.node.value},
      {"predicted_probability", o.predicted.probability},
      {"threshold", o.threshold},
      {"genus_node", o.genus.value},
      {"intermediate_node",
       o.intermediate ? json(o.intermediate->value) : json(nullptr)}};
}

std::vector<NodeId> rankChildren(const Hierarchy& h, NodeId genus,
                                 const Encounter& e,
                                 const Recognizer& recognizer) {
  std::vector<std::pair<double, NodeId>> scored;
  for (NodeId c : h.childrenOf(genus)) {
    double best = 0.0;
    for (const auto& v : e.visualObjects) {
      best = std::max(best, recognizer.childProbability(h, c, v));
    }
    scored.emplace_back(best, c);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<NodeId> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.second);
  return out;
}

EncounterDialog::EncounterDialog(const Hierarchy& h, EncounterPtr e,
                                 const Recognizer& recognizer)
    : hierarchy_(&h),
      rootStamp_(h.stamp(h.root())),
      encounter_(std::move(e)),
      recognizer_(&recognizer),
      prediction_{h.root(), 1.0},
      ascendAt_(h.root()),
      current_(h.root()),
      target_(h.root()) {
  if (!encounter_) throw InvalidInput("null encounter");
  validateEncounter(*encounter_);
}

EncounterDialog::EncounterDialog(const Hierarchy& h, EncounterPtr e,
                                 const Recognizer& recognizer, double threshold)
    : EncounterDialog(h, std::move(e), recognizer) {
  threshold_ = threshold;
  prediction_ = recognizer.predictGenus(h, *encounter_, threshold, &traces_);
  ascendAt_ = prediction_.node;
  advance();
}

EncounterDialog EncounterDialog::ascendFrom(const Hierarchy& h, EncounterPtr e,
                                            const Recognizer& recognizer,
                                            NodeId start) {
  EncounterDialog d(h, std::move(e), recognizer);
  h.node(start);
  d.prediction_ = Prediction{start, 1.0};
  d.ascendAt_ = start;
  d.advance();
  return d;
}

EncounterDialog EncounterDialog::refineFrom(const Hierarchy& h, EncounterPtr e,
                                            const Recognizer& recognizer,
                                            NodeId genus) {
  EncounterDialog d(h, std::move(e), recognizer);
  h.node(genus);
  d.prediction_ = Prediction{genus, 1.0};
  d.ascendAt_ = genus;
  d.enterRefine(genus);
  d.advance();
  return d;
}

void EncounterDialog::enterRefine(NodeId genus) {
  genus_ = genus;
  phase_ = Phase::Refine;
  current_ = genus;
  order_ = rankChildren(*hierarchy_, genus, *encounter_, *recognizer_);
  index_ = 0;
  step_ = genus != hierarchy_->root() && !hierarchy_->node(genus).encounters.empty()
              ? Step::AskSameGenus
              : Step::AskGenus;
}

void EncounterDialog::descendInto(NodeId child) {
  current_ = child;
  order_ = rankChildren(*hierarchy_, child, *encounter_, *recognizer_);
  index_ = 0;
  step_ = Step::AskGenus;
}

void EncounterDialog::decide(PlacementAction action, NodeId target) {
  action_ = action;
  target_ = target;
  phase_ = Phase::Decided;
  pending_.reset();
}

void EncounterDialog::advance() {
  pending_.reset();
  if (phase_ == Phase::Ascend) {
    if (ascendAt_ == hierarchy_->root()) {
      enterRefine(ascendAt_);
    } else {
      pending_ = Query{QueryKind::Genus, encounter_->id, ascendAt_, std::nullopt};
      return;
    }
  }
  if (phase_ != Phase::Refine) return;
  if (step_ == Step::AskSameGenus) {
    pending_ = Query{QueryKind::SameObject, encounter_->id, current_, std::nullopt};
    return;
  }
  if (index_ >= order_.size()) {
    decide(PlacementAction::NewChild, current_);
    return;
  }
  const NodeId child = order_[index_];
  switch (step_) {
    case Step::AskSameGenus:
      break;
    case Step::AskGenus:
      pending_ = Query{QueryKind::Genus, encounter_->id, child, std::nullopt};
      break;
    case Step::AskSame:
      pending_ = Query{QueryKind::SameObject, encounter_->id, child, std::nullopt};
      break;
    case Step::AskShares:
      pending_ = Query{QueryKind::SharesGenusBelow, encounter_->id, child, current_};
      break;
  }
}

void EncounterDialog::answer(bool yes) {
  if (!pending_) throw PreconditionError("no pending query to answer");
  ++queries_;
  if (phase_ == Phase::Ascend) {
    ++ascendQueries_;
    if (yes) {
      enterRefine(ascendAt_);
    } else {
      ascendAt_ = hierarchy_->parentOf(ascendAt_);
    }
    advance();
    return;
  }
  if (step_ == Step::AskSameGenus) {
    if (yes) {
      decide(PlacementAction::Merge, current_);
      return;
    }
    step_ = Step::AskGenus;
    advance();
    return;
  }

  const NodeId child = order_[index_];
  switch (step_) {
    case Step::AskSameGenus:
      break;
    case Step::AskGenus:
      ++childrenInspected_;
      if (!yes) {
        step_ = Step::AskShares;
      } else if (!hierarchy_->node(child).encounters.empty()) {
        step_ = Step::AskSame;
      } else {
        descendInto(child);
      }
      break;
    case Step::AskSame:
      if (yes) {
        decide(PlacementAction::Merge, child);
        return;
      }
      descendInto(child);
      break;
    case Step::AskShares:
      if (yes) {
        decide(PlacementAction::InsertIntermediate, child);
        return;
      }
      ++index_;
      step_ = Step::AskGenus;
      break;
  }
  advance();
}

PlacementOutcome EncounterDialog::commit(Hierarchy& h,
                                         const Annotator& annotator) {
  if (phase_ == Phase::Committed) {
    throw PreconditionError("placement already committed");
  }
  if (phase_ != Phase::Decided) {
    throw PreconditionError("placement not decided yet");
  }
  if (&h != hierarchy_ || h.stamp(h.root()) != rootStamp_) {
    throw PreconditionError("hierarchy changed during the dialog");
  }

  PlacementOutcome out;
  out.action = action_;
  out.queriesAsked = queries_;
  out.predicted = prediction_;
  out.threshold = threshold_;
  out.genus = genus_.value_or(h.root());
  out.ascendQueries = ascendQueries_;
  out.childrenInspected = childrenInspected_;

  switch (action_) {
    case PlacementAction::Merge:
      h.addEncounterToNode(target_, encounter_);
      out.placedNode = target_;
      break;
    case PlacementAction::NewChild:
      out.placedNode =
          h.addObjectNode(target_, encounter_, annotator.objectAnnotation(*encounter_));
      break;
    case PlacementAction::InsertIntermediate: {
      auto mid = annotator.intermediateAnnotation(h, target_, *encounter_);
      auto leaf = annotator.objectAnnotation(*encounter_);
      const auto [m, n] =
          h.insertIntermediate(current_, target_, encounter_, std::move(mid),
                               std::move(leaf));
      out.intermediate = m;
      out.placedNode = n;
      break;
    }
    case PlacementAction::Descend:
      throw ConsistencyError("descend is not a placing action");
  }
  phase_ = Phase::Committed;
  return out;
}

NodeId ascendToValidGenus(const Hierarchy& h, const Encounter& e, NodeId start,
                          Oracle& oracle, std::size_t* queries) {
  NodeId n = start;
  h.node(n);
  std::size_t asked = 0;
  while (n != h.root()) {
    ++asked;
    if (oracle.genusOf(h, e, n)) break;
    n = h.parentOf(n);
  }
  if (queries) *queries = asked;
  return n;
}

namespace {

void drive(EncounterDialog& dialog, const Hierarchy& h, Oracle& oracle,
           Transcript* transcript) {
  while (const auto& q = dialog.pendingQuery()) {
    const Query query = *q;
    const std::string id = transcript ? transcript->recordQuery(query) : "";
    const bool yes = ask(oracle, h, dialog.encounter(), query);
    if (transcript) transcript->recordAnswer(id, yes);
    dialog.answer(yes);
  }
}

}  // namespace

PlacementOutcome refineGenus(Hierarchy& h, NodeId genus, EncounterPtr e,
                             Oracle& oracle, const Recognizer& recognizer) {
  auto dialog = EncounterDialog::refineFrom(h, std::move(e), recognizer, genus);
  drive(dialog, h, oracle, nullptr);
  return dialog.commit(h, oracle);
}

void recordSupervision(SupervisionMemory& memory, const EncounterDialog& dialog,
                       const PlacementOutcome& outcome) {
  const auto& vos = dialog.encounter().visualObjects;
  const auto& traces = dialog.traces();
  for (std::size_t i = 0; i < vos.size(); ++i) {
    memory.append(SupervisionRecord{
        vos[i], outcome.placedNode,
        i < traces.size() ? traces[i] : std::vector<TraceStep>{}});
  }
}

PlacementOutcome processEncounter(Hierarchy& h, EncounterPtr e, Oracle& oracle,
                                  SupervisionMemory& memory,
                                  const Recognizer& recognizer,
                                  Transcript* transcript) {
  const double threshold = recognizer.rejectionThreshold(memory, h);
  EncounterDialog dialog(h, std::move(e), recognizer, threshold);
  drive(dialog, h, oracle, transcript);
  const PlacementOutcome outcome = dialog.commit(h, oracle);
  recordSupervision(memory, dialog, outcome);
  if (transcript) transcript->recordPlacement(dialog.encounter().id, outcome);
  return outcome;
}

}  // namespace gd

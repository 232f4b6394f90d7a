#include "gd/service.hpp"

#include <sstream>

#include <httplib.h>

#include "gd/embedding_file.hpp"
#include "gd/errors.hpp"

namespace gd::service {

using nlohmann::json;

namespace {

template <class T>
T field(const json& obj, const char* name, T fallback) {
  if (!obj.contains(name) || obj[name].is_null()) return fallback;
  try {
    return obj[name].get<T>();
  } catch (const json::exception&) {
    throw ServiceError(400, std::string("field '") + name + "' has the wrong type");
  }
}

}  // namespace

SessionSpec SessionSpec::fromJson(const json& body) {
  if (!body.is_object()) throw ServiceError(400, "request body must be an object");
  SessionSpec spec;
  const bool hasSynthetic = body.contains("synthetic");
  const bool hasEmbeddings = body.contains("embeddings");
  if (hasSynthetic == hasEmbeddings) {
    throw ServiceError(400, "give exactly one of 'synthetic' or 'embeddings'");
  }
  if (hasSynthetic) {
    const auto& s = body["synthetic"];
    if (!s.is_object()) throw ServiceError(400, "'synthetic' must be an object");
    GeneratorConfig g;
    g.depth = field(s, "depth", g.depth);
    g.branching = field(s, "branching", g.branching);
    g.encountersPerLeaf = field(s, "encounters_per_leaf", g.encountersPerLeaf);
    g.dimension = field(s, "dimension", g.dimension);
    g.viewNoiseSigma = field(s, "view_noise_sigma", g.viewNoiseSigma);
    g.seed = field<std::uint64_t>(s, "seed", g.seed);
    if (s.contains("level_offset_scales")) {
      g.levelOffsetScales = field(s, "level_offset_scales", std::vector<double>{});
    } else if (g.depth != 4) {
      g.levelOffsetScales.clear();
    }
    try {
      g.validate();
    } catch (const InvalidInput& e) {
      throw ServiceError(400, e.what());
    }
    spec.synthetic = g;
  } else {
    if (!body["embeddings"].is_string()) {
      throw ServiceError(400, "'embeddings' must be a string of JSON lines");
    }
    spec.embeddings = body["embeddings"].get<std::string>();
  }
  spec.orderingSeed = field<std::uint64_t>(body, "ordering_seed", 0);
  spec.tailSize = field<std::size_t>(body, "tail_size", 16);
  if (spec.tailSize == 0) throw ServiceError(400, "tail_size must be positive");
  if (body.contains("open_space_scale")) {
    spec.openSpaceScale = field<double>(body, "open_space_scale", 0.0);
    if (!(*spec.openSpaceScale > 0.0)) {
      throw ServiceError(400, "open_space_scale must be positive");
    }
  }
  return spec;
}

namespace {

Dataset loadDataset(const SessionSpec& spec) {
  if (spec.synthetic) return generateDataset(*spec.synthetic);
  std::istringstream in(*spec.embeddings);
  std::vector<Encounter> encounters;
  try {
    encounters = parseEmbeddingLines(in);
  } catch (const std::exception& e) {
    throw ServiceError(400, std::string("embeddings: ") + e.what());
  }
  if (encounters.empty()) throw ServiceError(400, "embeddings: no encounters");
  const bool labelled = std::all_of(encounters.begin(), encounters.end(),
                                    [](const Encounter& e) { return e.groundTruthLeaf.has_value(); });
  if (labelled) {
    try {
      return datasetFromEncounters(std::move(encounters));
    } catch (const InvalidInput& e) {
      throw ServiceError(400, std::string("embeddings: ") + e.what());
    }
  }
  return Dataset{GroundTruthTree{}, std::move(encounters)};
}

std::optional<std::string> rootLabel(const Dataset& data) {
  if (data.tree.size() == 0) return std::nullopt;
  return data.tree.node(data.tree.root()).label;
}

}  // namespace

Session::Session(std::string id, const SessionSpec& spec)
    : id_(std::move(id)),
      data_(loadDataset(spec)),
      hierarchy_(rootLabel(data_)) {
  RunConfig rc;
  if (spec.synthetic) rc.generator = *spec.synthetic;
  rc.tailSize = spec.tailSize;
  rc.openSpaceScale = spec.openSpaceScale;
  recognizer_ = std::make_unique<Recognizer>(
      evmConfigFor(rc, data_, spec.synthetic.has_value()));

  std::vector<std::size_t> order(data_.encounters.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng::stream(spec.orderingSeed, 0);
  rng.shuffle(order);
  for (std::size_t i : order) {
    queue_.push_back(std::make_shared<const Encounter>(data_.encounters[i]));
  }
}

json Session::issuePending() {
  const Query& q = *dialog_->pendingQuery();
  if (!pendingId_) pendingId_ = transcript_.recordQuery(q);
  json out = toJson(q);
  out["type"] = "query";
  out["query_id"] = *pendingId_;
  return out;
}

json Session::commitPlacement() {
  const PlacementOutcome outcome = dialog_->commit(hierarchy_, annotator_);
  recordSupervision(memory_, *dialog_, outcome);
  transcript_.recordPlacement(dialog_->encounter().id, outcome);
  metrics_.push_back(MetricRow{
      metrics_.size(),
      hierarchy_.geodesicDistance(outcome.predicted.node, outcome.placedNode),
      hierarchy_.depth(outcome.placedNode)});
  json out = toJson(outcome);
  out["type"] = "placement";
  out["encounter_id"] = dialog_->encounter().id;
  out["iteration"] = metrics_.size() - 1;
  dialog_.reset();
  pendingId_.reset();
  return out;
}

json Session::nextQuery() {
  std::lock_guard lock(mutex_);
  if (dialog_ && dialog_->pendingQuery()) return issuePending();
  if (nextEncounter_ >= queue_.size()) {
    return json{{"type", "done"}, {"placements", metrics_.size()}};
  }
  const EncounterPtr e = queue_[nextEncounter_++];
  const double threshold = recognizer_->rejectionThreshold(memory_, hierarchy_);
  dialog_.emplace(hierarchy_, e, *recognizer_, threshold);
  if (dialog_->decided()) return commitPlacement();
  return issuePending();
}

json Session::postAnswer(const std::string& queryId, bool answer) {
  std::lock_guard lock(mutex_);
  if (!dialog_ || !pendingId_ || *pendingId_ != queryId) {
    throw ServiceError(409, "query '" + queryId + "' is not the pending query");
  }
  transcript_.recordAnswer(queryId, answer);
  pendingId_.reset();
  dialog_->answer(answer);
  json out{{"status", "ok"}};
  if (dialog_->decided()) out["placement"] = commitPlacement();
  return out;
}

json Session::hierarchy() const {
  std::lock_guard lock(mutex_);
  return hierarchy_.toJson();
}

json Session::metrics() const {
  std::lock_guard lock(mutex_);
  json rows = json::array();
  for (const auto& m : metrics_) {
    rows.push_back({{"iteration", m.iteration},
                    {"predict_genus", m.predictGenus},
                    {"naive", m.naive}});
  }
  return json{{"iterations", metrics_.size()}, {"rows", std::move(rows)}};
}

json Session::transcript() const {
  std::lock_guard lock(mutex_);
  return transcript_.events();
}

std::size_t Session::queued() const {
  std::lock_guard lock(mutex_);
  return queue_.size() - nextEncounter_;
}

std::size_t Session::placements() const {
  std::lock_guard lock(mutex_);
  return metrics_.size();
}

std::string SessionRegistry::create(const json& body) {
  const SessionSpec spec = SessionSpec::fromJson(body);
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(next_++);
  }
  auto session = std::make_shared<Session>(id, spec);
  std::lock_guard lock(mutex_);
  sessions_.emplace(id, std::move(session));
  return id;
}

std::shared_ptr<Session> SessionRegistry::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session '" + id + "'");
  return it->second;
}

std::size_t SessionRegistry::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

namespace {

std::vector<std::string_view> pathSegments(std::string_view path) {
  std::vector<std::string_view> out;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    const auto slash = path.find('/');
    out.push_back(path.substr(0, slash));
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash);
  }
  return out;
}

json parseBody(std::string_view body) {
  try {
    return json::parse(body.empty() ? std::string_view("{}") : body);
  } catch (const json::parse_error& e) {
    throw ServiceError(400, std::string("invalid JSON body: ") + e.what());
  }
}

Response route(SessionRegistry& registry, std::string_view method,
               std::string_view path, std::string_view body) {
  const auto seg = pathSegments(path);
  if (seg.empty() || seg[0] != "sessions") throw ServiceError(404, "no such route");
  if (seg.size() == 1) {
    if (method != "POST") throw ServiceError(405, "use POST /sessions");
    const std::string id = registry.create(parseBody(body));
    return {201, json{{"session_id", id}, {"queue_length", registry.find(id)->queued()}}};
  }
  if (seg.size() != 3) throw ServiceError(404, "no such route");
  auto session = registry.find(std::string(seg[1]));
  const std::string_view action = seg[2];
  if (action == "answer") {
    if (method != "POST") throw ServiceError(405, "use POST for answers");
    const json req = parseBody(body);
    if (!req.is_object() || !req.contains("query_id") || !req["query_id"].is_string() ||
        !req.contains("answer") || !req["answer"].is_boolean()) {
      throw ServiceError(400, "answer needs string 'query_id' and boolean 'answer'");
    }
    return {200, session->postAnswer(req["query_id"].get<std::string>(),
                                     req["answer"].get<bool>())};
  }
  if (method != "GET") throw ServiceError(405, "use GET");
  if (action == "query") return {200, session->nextQuery()};
  if (action == "hierarchy") return {200, session->hierarchy()};
  if (action == "metrics") return {200, session->metrics()};
  if (action == "transcript") return {200, session->transcript()};
  throw ServiceError(404, "no such route");
}

}  // namespace

Response dispatch(SessionRegistry& registry, std::string_view method,
                  std::string_view path, std::string_view body) {
  try {
    return route(registry, method, path, body);
  } catch (const ServiceError& e) {
    return {e.status(), json{{"error", e.what()}}};
  } catch (const std::exception& e) {
    return {500, json{{"error", e.what()}}};
  }
}

void mountRoutes(httplib::Server& server, SessionRegistry& registry,
                 const std::string& staticDir) {
  auto handler = [&registry](const httplib::Request& req, httplib::Response& res) {
    const Response r = dispatch(registry, req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Post("/sessions", handler);
  server.Get(R"(/sessions/[^/]+/(query|hierarchy|metrics|transcript))", handler);
  server.Post(R"(/sessions/[^/]+/answer)", handler);
  if (!staticDir.empty()) server.set_mount_point("/", staticDir);
}

}  // namespace gd::service

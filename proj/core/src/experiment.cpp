#include "gd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "gd/errors.hpp"
#include "gd/recognition.hpp"

namespace gd {

void RunConfig::validate() const {
  generator.validate();
  if (runs < 1) throw InvalidInput("runs must be at least 1");
  if (tailSize < 1) throw InvalidInput("tail size must be positive");
  if (openSpaceScale && !(*openSpaceScale > 0.0)) {
    throw InvalidInput("open-space scale must be positive");
  }
}

std::string_view to_string(CostModel model) {
  return model == CostModel::PredictGenus ? "predict_genus" : "naive";
}

double defaultOpenSpaceScale(const GeneratorConfig& config) {
  return 10.0 * config.viewNoiseSigma * std::sqrt(double(config.dimension));
}

double estimateOpenSpaceScale(const std::vector<Encounter>& encounters) {
  std::vector<const VisualObject*> all;
  for (const auto& e : encounters) {
    for (const auto& v : e.visualObjects) all.push_back(&v);
  }
  if (all.size() < 2) return 10.0;
  std::vector<double> nearest;
  nearest.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (i == j) continue;
      best = std::min(best, squaredDistanceBounded(all[i]->embedding.values(),
                                                   all[j]->embedding.values(),
                                                   best));
    }
    nearest.push_back(std::sqrt(best));
  }
  const auto mid = nearest.begin() + static_cast<long>(nearest.size() / 2);
  std::nth_element(nearest.begin(), mid, nearest.end());
  const double scale = 10.0 * *mid / std::sqrt(2.0);
  return scale > 0.0 ? scale : 10.0;
}

EvmConfig evmConfigFor(const RunConfig& config, const Dataset& data,
                       bool synthetic) {
  EvmConfig evm;
  evm.tailSize = config.tailSize;
  if (config.openSpaceScale) {
    evm.openSpaceScale = *config.openSpaceScale;
  } else if (synthetic) {
    evm.openSpaceScale = defaultOpenSpaceScale(config.generator);
  } else {
    evm.openSpaceScale = estimateOpenSpaceScale(data.encounters);
  }
  return evm;
}

namespace {

RunCosts runOrdered(const Dataset& data, const std::vector<EncounterPtr>& pool,
                    const EvmConfig& evm, std::uint64_t orderingSeed,
                    int runIndex, const RunObserver& observer) {
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng::stream(orderingSeed, static_cast<std::uint64_t>(runIndex));
  rng.shuffle(order);

  Hierarchy h(data.tree.node(data.tree.root()).label);
  SupervisionMemory memory;
  Recognizer recognizer(evm);
  SimulatedOracle oracle(data.tree);

  RunCosts costs;
  costs.reserve(2 * order.size());
  for (std::size_t it = 0; it < order.size(); ++it) {
    const auto outcome =
        processEncounter(h, pool[order[it]], oracle, memory, recognizer);
    costs.push_back({it, CostModel::PredictGenus,
                     h.geodesicDistance(outcome.predicted.node, outcome.placedNode)});
    costs.push_back({it, CostModel::Naive, h.depth(outcome.placedNode)});
    if (observer) observer(it, h, outcome);
  }
  return costs;
}

std::vector<EncounterPtr> sharedPool(const Dataset& data) {
  std::vector<EncounterPtr> pool;
  pool.reserve(data.encounters.size());
  for (const auto& e : data.encounters) {
    pool.push_back(std::make_shared<const Encounter>(e));
  }
  return pool;
}

}  // namespace

RunCosts runOnce(const RunConfig& config, const Dataset& data,
                 const EvmConfig& evm, int runIndex,
                 const RunObserver& observer) {
  return runOrdered(data, sharedPool(data), evm, config.orderingSeed, runIndex,
                    observer);
}

RunCosts runOnce(const RunConfig& config, int runIndex) {
  config.validate();
  const Dataset data = generateDataset(config.generator);
  return runOnce(config, data, evmConfigFor(config, data, true), runIndex);
}

std::vector<RunCosts> runAll(const RunConfig& config, const Dataset& data,
                             const EvmConfig& evm, unsigned threads) {
  config.validate();
  const auto pool = sharedPool(data);
  std::vector<RunCosts> results(static_cast<std::size_t>(config.runs));
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(config.runs));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  auto worker = [&] {
    for (int r = next++; r < config.runs; r = next++) {
      try {
        results[static_cast<std::size_t>(r)] =
            runOrdered(data, pool, evm, config.orderingSeed, r, {});
      } catch (...) {
        std::lock_guard lock(failureMutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < threads; ++t) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

AggregatedCosts aggregate(const std::vector<RunCosts>& runs) {
  AggregatedCosts out;
  if (runs.empty()) return out;
  const std::size_t length = runs.front().size();
  for (const auto& r : runs) {
    if (r.size() != length) throw InvalidInput("runs differ in length");
  }
  std::size_t iterations = 0;
  for (const auto& c : runs.front()) iterations = std::max(iterations, c.iteration + 1);
  out.predictGenus.assign(iterations, 0.0);
  out.naive.assign(iterations, 0.0);
  for (const auto& r : runs) {
    for (const auto& c : r) {
      auto& series = c.model == CostModel::PredictGenus ? out.predictGenus : out.naive;
      series.at(c.iteration) += c.geodesicCost;
    }
  }
  const double n = static_cast<double>(runs.size());
  for (auto& v : out.predictGenus) v /= n;
  for (auto& v : out.naive) v /= n;
  return out;
}

namespace {

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

constexpr std::string_view kCsvHeader = "iteration,model,mean_geodesic_cost";

}  // namespace

std::string formatCsv(const AggregatedCosts& costs) {
  std::string out(kCsvHeader);
  out += '\n';
  for (std::size_t i = 0; i < costs.iterations(); ++i) {
    out += std::to_string(i) + ",predict_genus," + shortest(costs.predictGenus[i]) + '\n';
    out += std::to_string(i) + ",naive," + shortest(costs.naive[i]) + '\n';
  }
  return out;
}

void writeCsv(const AggregatedCosts& costs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << formatCsv(costs);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

AggregatedCosts parseCsv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineNo = 1;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ParseError(lineNo, "expected header '" + std::string(kCsvHeader) + "'");
  }
  AggregatedCosts out;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ParseError(lineNo, "expected three fields");
    }
    std::size_t it = 0;
    double value = 0.0;
    const std::string model = line.substr(c1 + 1, c2 - c1 - 1);
    const char* b = line.data();
    if (std::from_chars(b, b + c1, it).ec != std::errc{} ||
        std::from_chars(b + c2 + 1, b + line.size(), value).ec != std::errc{}) {
      throw ParseError(lineNo, "malformed number");
    }
    auto& series = model == "predict_genus" ? out.predictGenus
                   : model == "naive"       ? out.naive
                                            : throw ParseError(lineNo, "unknown model '" + model + "'");
    if (series.size() <= it) series.resize(it + 1, 0.0);
    series[it] = value;
  }
  if (out.predictGenus.size() != out.naive.size()) {
    throw ParseError(lineNo, "model series differ in length");
  }
  return out;
}

AggregatedCosts readCsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseCsv(ss.str());
}

void writeGnuplot(const AggregatedCosts& costs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# iteration predict_genus naive\n";
  for (std::size_t i = 0; i < costs.iterations(); ++i) {
    out << i << ' ' << shortest(costs.predictGenus[i]) << ' '
        << shortest(costs.naive[i]) << '\n';
  }
}

}  // namespace gd

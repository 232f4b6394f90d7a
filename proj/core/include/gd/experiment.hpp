#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gd/evm.hpp"
#include "gd/hierarchy.hpp"
#include "gd/interaction.hpp"
#include "gd/synthetic.hpp"

namespace gd {

struct RunConfig {
  GeneratorConfig generator;
  int runs = 100;
  std::uint64_t orderingSeed = 0;
  std::size_t tailSize = 16;
  /// Scale of the no-negatives Weibull; unset means derive from the data.
  std::optional<double> openSpaceScale;
  std::filesystem::path outputPath = "costs.csv";

  void validate() const;
};

enum class CostModel { PredictGenus, Naive };

std::string_view to_string(CostModel model);

struct IterationCost {
  std::size_t iteration = 0;
  CostModel model = CostModel::PredictGenus;
  int geodesicCost = 0;

  bool operator==(const IterationCost&) const = default;
};

using RunCosts = std::vector<IterationCost>;

/// Called after each placement with the updated hierarchy.
using RunObserver = std::function<void(std::size_t iteration, const Hierarchy& h,
                                       const PlacementOutcome& outcome)>;

/// 10 x the expected norm of a view-noise vector, sigma * sqrt(D).
double defaultOpenSpaceScale(const GeneratorConfig& config);

/// 10 x the median nearest-neighbour distance between visual objects
/// divided by sqrt(2) (the same quantity estimated from data).
double estimateOpenSpaceScale(const std::vector<Encounter>& encounters);

EvmConfig evmConfigFor(const RunConfig& config, const Dataset& data,
                       bool synthetic);

/// Presents the dataset in the order given by (orderingSeed, runIndex) and
/// records, per iteration, the geodesic distance from the predicted node
/// (predict_genus) and from the root (naive) to the node finally
/// confirmed. Both models share the one oracle-driven hierarchy.
RunCosts runOnce(const RunConfig& config, const Dataset& data,
                 const EvmConfig& evm, int runIndex,
                 const RunObserver& observer = {});

/// Generates the synthetic dataset and runs once.
RunCosts runOnce(const RunConfig& config, int runIndex);

/// All runs, spread over `threads` workers (0 = hardware concurrency).
std::vector<RunCosts> runAll(const RunConfig& config, const Dataset& data,
                             const EvmConfig& evm, unsigned threads = 0);

struct AggregatedCosts {
  std::vector<double> predictGenus;
  std::vector<double> naive;

  std::size_t iterations() const noexcept { return predictGenus.size(); }
  bool operator==(const AggregatedCosts&) const = default;
};

/// Per-iteration arithmetic mean of each model over runs of equal length.
AggregatedCosts aggregate(const std::vector<RunCosts>& runs);

/// "iteration,model,mean_geodesic_cost" then two rows per iteration.
std::string formatCsv(const AggregatedCosts& costs);
void writeCsv(const AggregatedCosts& costs, const std::filesystem::path& path);
AggregatedCosts readCsv(const std::filesystem::path& path);
AggregatedCosts parseCsv(std::string_view text);

/// Whitespace-separated columns: iteration predict_genus naive.
void writeGnuplot(const AggregatedCosts& costs, const std::filesystem::path& path);

}  // namespace gd

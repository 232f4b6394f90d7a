// gd: run the geodesic-cost experiment, serve an interactive session, or
// validate invariants.

#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>

#include "gd/embedding_file.hpp"
#include "gd/errors.hpp"
#include "gd/experiment.hpp"
#include "gd/service.hpp"
#include "gd/synthetic.hpp"
#include "validate.hpp"

namespace {

void addGeneratorOptions(CLI::App& cmd, gd::RunConfig& cfg, std::uint64_t& seed) {
  auto& g = cfg.generator;
  cmd.add_option("--depth", g.depth, "Levels below the root")->envname("GD_DEPTH");
  cmd.add_option("--branching", g.branching, "Children per inner node")
      ->envname("GD_BRANCHING");
  cmd.add_option("--encounters-per-leaf", g.encountersPerLeaf, "Encounters per leaf object")
      ->envname("GD_ENCOUNTERS_PER_LEAF");
  cmd.add_option("--dim", g.dimension, "Embedding dimension")->envname("GD_DIM");
  cmd.add_option("--level-scales", g.levelOffsetScales,
                 "Per-level prototype offset scales (default halves from 8)")
      ->envname("GD_LEVEL_SCALES")
      ->delimiter(',');
  cmd.add_option("--view-noise", g.viewNoiseSigma, "View noise standard deviation")
      ->envname("GD_VIEW_NOISE");
  cmd.add_option("--tail-size", cfg.tailSize, "Weibull tail size")->envname("GD_TAIL_SIZE");
  cmd.add_option("--seed", seed, "Seed for data generation and orderings")
      ->envname("GD_SEED");
  cmd.add_option("--ordering-seed", cfg.orderingSeed,
                 "Seed for presentation orders (defaults to --seed)")
      ->envname("GD_ORDERING_SEED");
  cmd.add_option("--open-space-scale", cfg.openSpaceScale,
                 "Weibull scale for classes without negatives")
      ->envname("GD_OPEN_SPACE_SCALE");
}

// Scales default to (8, 4, 2, 1) for depth 4; other depths derive them.
void finishConfig(gd::RunConfig& cfg, const CLI::App& cmd, std::uint64_t seed) {
  cfg.generator.seed = seed;
  if (cmd.count("--ordering-seed") == 0 && !std::getenv("GD_ORDERING_SEED")) {
    cfg.orderingSeed = seed;
  }
  if (cmd.count("--level-scales") == 0 && !std::getenv("GD_LEVEL_SCALES") &&
      cfg.generator.depth != 4) {
    cfg.generator.levelOffsetScales.clear();
  }
}

httplib::Server* activeServer = nullptr;

void stopServer(int) {
  if (activeServer) activeServer->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive genus/differentia hierarchy learner"};
  app.require_subcommand(1);

  gd::RunConfig runCfg;
  std::uint64_t runSeed = 0;
  std::string embeddings;
  std::string gnuplot;
  unsigned threads = 0;
  std::string outPath = "costs.csv";
  auto* run = app.add_subcommand("run", "Run the geodesic-cost experiment and write a CSV");
  addGeneratorOptions(*run, runCfg, runSeed);
  run->add_option("--runs", runCfg.runs, "Number of random orderings")->envname("GD_RUNS");
  run->add_option("--out", outPath, "CSV output path")->envname("GD_OUT");
  run->add_option("--gnuplot", gnuplot, "Also write a gnuplot data file")
      ->envname("GD_GNUPLOT");
  run->add_option("--embeddings", embeddings,
                  "Use a labelled embedding file instead of synthetic data")
      ->envname("GD_EMBEDDINGS");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)")
      ->envname("GD_THREADS");

  gd::RunConfig genCfg;
  std::uint64_t genSeed = 0;
  std::string genOut = "encounters.jsonl";
  auto* generate = app.add_subcommand("generate", "Write a synthetic embedding file");
  addGeneratorOptions(*generate, genCfg, genSeed);
  generate->add_option("--out", genOut, "Output path")->envname("GD_OUT");

  bool interactive = false;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string staticDir;
  auto* demo = app.add_subcommand("demo", "Serve the session API for a human oracle");
  demo->add_flag("--interactive", interactive, "Serve sessions over HTTP");
  demo->add_option("--host", host, "Bind address")->envname("GD_HOST");
  demo->add_option("--port", port, "Bind port")->envname("GD_PORT");
  demo->add_option("--static-dir", staticDir, "Directory with the web console assets")
      ->envname("GD_STATIC_DIR");

  gd::RunConfig valCfg;
  std::uint64_t valSeed = 0;
  valCfg.runs = 3;
  valCfg.generator.depth = 3;
  valCfg.generator.encountersPerLeaf = 3;
  valCfg.generator.dimension = 16;
  valCfg.generator.levelOffsetScales.clear();
  auto* validate = app.add_subcommand("validate", "Run the invariant suite at desk scale");
  addGeneratorOptions(*validate, valCfg, valSeed);
  validate->add_option("--runs", valCfg.runs, "Runs to check")->envname("GD_RUNS");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      finishConfig(runCfg, *run, runSeed);
      runCfg.outputPath = outPath;
      runCfg.validate();
      const bool synthetic = embeddings.empty();
      const gd::Dataset data = synthetic
                                   ? gd::generateDataset(runCfg.generator)
                                   : gd::datasetFromEncounters(gd::loadEmbeddingFile(embeddings));
      const gd::EvmConfig evm = gd::evmConfigFor(runCfg, data, synthetic);
      const auto start = std::chrono::steady_clock::now();
      const auto costs = gd::aggregate(gd::runAll(runCfg, data, evm, threads));
      gd::writeCsv(costs, runCfg.outputPath);
      if (!gnuplot.empty()) gd::writeGnuplot(costs, gnuplot);
      const double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start).count();
      std::cerr << "wrote " << costs.iterations() << " iterations x " << runCfg.runs
                << " runs to " << runCfg.outputPath.string() << " in " << secs << " s\n";
      return 0;
    }
    if (*generate) {
      finishConfig(genCfg, *generate, genSeed);
      gd::writeEmbeddingFile(genOut, gd::generateDataset(genCfg.generator).encounters);
      return 0;
    }
    if (*demo) {
      if (!interactive) {
        std::cerr << "demo currently only supports --interactive\n";
        return 2;
      }
      gd::service::SessionRegistry registry;
      httplib::Server server;
      gd::service::mountRoutes(server, registry, staticDir);
      activeServer = &server;
      std::signal(SIGINT, stopServer);
      std::signal(SIGTERM, stopServer);
      std::cerr << "serving on http://" << host << ':' << port << '\n';
      if (!server.listen(host, port)) {
        std::cerr << "cannot bind " << host << ':' << port << '\n';
        return 1;
      }
      return 0;
    }
    if (*validate) {
      finishConfig(valCfg, *validate, valSeed);
      return gd::tools::runValidation(valCfg, std::cout) == 0 ? 0 : 1;
    }
  } catch (const gd::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

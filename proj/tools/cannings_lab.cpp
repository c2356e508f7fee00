// Batch experiment runner: every statistical check and raw sampler behind a
// config-driven CLI with seeded, reproducible parallel execution.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cannings/config.hpp"
#include "cannings/experiment.hpp"

namespace {

const std::string kCommands =
    "simulate-tree, trace, sample-limit, compare-fdd, moments, "
    "transition-check, cdfi, counterexample, appendix-a, discrepancy";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cannings_lab: inhomogeneous Cannings genealogy experiments"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  bool check = true;

  app.add_option("command", command, "one of: " + kCommands)->required();
  app.add_option("--config", config_path, "experiment config (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  auto* workers_opt =
      app.add_option("--workers", workers, "worker threads (default: config, "
                                           "then CANNINGS_LAB_WORKERS, then all cores)");
  app.add_option("--out", out_dir, "output directory (default: config out)");
  app.add_flag("--check,!--no-check", check,
               "evaluate pass/fail checks (exit 3 on failure)");

  CLI11_PARSE(app, argc, argv);

  try {
    cannings::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = cannings::load_config(config_path);
    if (*seed_opt) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (*workers_opt) {
      if (workers < 1) throw cannings::ValidationError("workers", "must be >= 1");
      cfg.workers = workers;
    } else if (cfg.workers == 0) {
      if (const char* env = std::getenv("CANNINGS_LAB_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) cfg.workers = w;
      }
    }
    return cannings::run_experiment(cfg, command, check, std::cout);
  } catch (const cannings::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const cannings::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
}

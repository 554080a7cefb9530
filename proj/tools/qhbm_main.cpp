// qhbm: run or validate the built-in experiments from a JSON config.
//
//   qhbm run <config.json> [--outdir DIR] [--restarts N] [--threads K]
//   qhbm validate <config.json>
//
// Exit codes: 0 success, 2 config error, 3 numerical abort.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>

#include "qhbm/experiments.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalAbort = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal-state and modular-Hamiltonian learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string outdir_override;
  int restarts_override = 0;
  int n_threads = static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;

  CLI::App* run = app.add_subcommand("run", "Run an experiment");
  run->add_option("config", config_path, "Experiment config (JSON)")
      ->required();
  run->add_option("--outdir", outdir_override, "Override the output directory");
  run->add_option("--restarts", restarts_override,
                  "Override the number of random restarts")
      ->check(CLI::PositiveNumber);
  run->add_option("--threads", n_threads, "Worker threads for restarts")
      ->check(CLI::PositiveNumber);

  CLI::App* validate = app.add_subcommand(
      "validate", "Check a config and print its canonical form");
  validate->add_option("config", config_path, "Experiment config (JSON)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    qhbm::ExperimentConfig config =
        qhbm::experiment_config_from_json(read_file(config_path));
    if (validate->parsed()) {
      std::fputs(qhbm::experiment_config_to_json(config).c_str(), stdout);
      return 0;
    }
    if (!outdir_override.empty()) config.outdir = outdir_override;
    if (restarts_override > 0) config.restarts = restarts_override;
    try {
      std::string summary = qhbm::run_experiment(config, n_threads);
      std::fputs(summary.c_str(), stdout);
      return 0;
    } catch (const std::runtime_error& e) {
      std::fprintf(stderr, "numerical abort: %s\n", e.what());
      return kExitNumericalAbort;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  }
}
